#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ergostat/empirical.hpp"

namespace ergo {

// Symbolic coding of a degree-d circle expanding map. The branch partition
// comes from the d preimages of the fixed point of the lift; itineraries to
// depth k give the approximate conjugacy h(x) to g_d as the base-d
// expansion, monotone with semi-conjugacy residual <= d * d^-k.
class ConjugacyCode {
 public:
  ConjugacyCode(const SystemSpec& sys, int degree, std::vector<double> branch_points);

  int degree() const { return degree_; }
  const std::vector<double>& branch_points() const { return branch_points_; }

  int symbol_of(double x) const;

  // h(x) from the depth-k itinerary of x.
  double conjugacy_value(double x, int depth) const;

 private:
  SystemSpec sys_;
  int degree_;
  std::vector<double> branch_points_;  // sorted, first = 0
};

// Verifies the winding number and constructs the branch partition.
ConjugacyCode build_conjugacy(const SystemSpec& sys);

// An invariant measure witness for the equilibrium analyses: either an
// exact atomic measure (periodic orbit) or the empirical measure of an
// orbit given by provenance.
struct MeasureWitness {
  enum class Kind { Atoms, OrbitEmpirical };
  Kind kind = Kind::OrbitEmpirical;
  std::optional<ProbMeasure> atoms;
  OrbitOrigin origin;
  long orbit_length = 0;
  std::string label;

  static MeasureWitness atomic(ProbMeasure measure, std::string label);
  static MeasureWitness orbit(const OrbitOrigin& origin, long n, std::string label);
};

// int log f' d nu by quadrature over atoms/bins.
double lyapunov_integral(const SystemSpec& sys, const ProbMeasure& mu);
// (1/n) sum log f'(f^j x) along an orbit.
double lyapunov_integral_orbit(const SystemSpec& sys, const OrbitOrigin& origin, long n);

struct EntropyEstimate {
  double value = 0.0;
  double error = 0.0;
  int block_order = 0;  // k of the slope H_{k+1} - H_k
  double h_km1 = 0.0, h_k = 0.0, h_kp1 = 0.0;  // block entropies used
  std::string method;
};

// Block-entropy slope from the depth-(k+1) itinerary statistics of one
// orbit. Refuses when blocks are undersampled (< 10 d^k occupied samples),
// reporting the largest reliable order in the exception text. The error
// combines the observed slope gap with the undersampling bias bound.
EntropyEstimate entropy_symbolic(const SystemSpec& sys, const ConjugacyCode& code,
                                 const OrbitOrigin& origin, long n, int block_order);

// Exactly zero for finitely supported measures.
EntropyEstimate entropy_atomic(const ProbMeasure& atoms);

struct ExpandingAnalysis {
  std::string label;
  EntropyEstimate entropy;
  double lyapunov = 0.0;
  double lyapunov_error = 0.0;
  double residual = 0.0;        // V = h - L
  double residual_error = 0.0;
  bool equilibrium_candidate = false;  // |V| <= residual_error
  std::vector<std::pair<double, bool>> k_r_flags;  // r -> V >= -r - error
  bool invariance_warning = false;
  double invariance_gap = 0.0;
};

struct PlyOptions {
  int block_order = 12;
  long orbit_length = 1000000;
  std::vector<double> r_grid = {0.0, 0.05, 0.1, 0.2, 0.5, 1.0};
  double invariance_tolerance = 0.05;
};

// V_f(nu) = h_nu - int log f' d nu with propagated error bars and K_r
// membership flags.
ExpandingAnalysis ply_residual(const SystemSpec& sys, const MeasureWitness& witness,
                               const PlyOptions& opt, const TestFunctionBasis& basis,
                               const BasisTable& table);

struct ConvexComboAnalysis {
  int first = 0, second = 0;
  double lambda = 0.0;
  double residual = 0.0, residual_error = 0.0;
  bool equilibrium_candidate = false;
};

struct ObservableEquilibriumReport {
  std::vector<ExpandingAnalysis> representatives;
  std::vector<ConvexComboAnalysis> combinations;  // entropy and L are affine
  bool all_candidates = false;
  double max_abs_residual = 0.0;
};

// Every observable representative (and pairwise convex combinations) must
// satisfy the PLY equality within estimator error.
ObservableEquilibriumReport observable_subset_of_equilibrium(
    const SystemSpec& sys, const std::vector<OrbitOrigin>& representative_origins,
    const std::vector<std::string>& labels, const PlyOptions& opt,
    const TestFunctionBasis& basis, const BasisTable& table);

struct LargeDeviationProbe {
  std::vector<long> ns;
  std::vector<double> escape_fraction;
  std::vector<double> rate;  // (1/n) log escape_fraction, NaN when no escapes
  bool all_in_neighborhood = false;  // no escapes at the largest n
  bool consistent = false;           // measurable rates stay <= -r + slack
};

// Fraction of points whose empirical distribution sigma_{n,x} stays outside
// the radius-neighborhood of the K_r pool, along the n schedule.
LargeDeviationProbe large_deviation_probe(const SystemSpec& sys, double r,
                                          const std::vector<Eigen::VectorXd>& pool,
                                          double radius, const std::vector<long>& ns,
                                          int sample_points, std::uint64_t seed,
                                          const TestFunctionBasis& basis,
                                          double slack = 0.05);

}  // namespace ergo
