#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ergostat/basis.hpp"
#include "ergostat/measure.hpp"
#include "ergostat/systems.hpp"

namespace ergo {

// Where an orbit starts: a seeded Lebesgue-typical point (ensemble work)
// or a fixed initial condition (diagnostics).
struct OrbitOrigin {
  bool seeded = true;
  std::uint64_t seed = 0;
  Point x0 = Point::Zero();

  static OrbitOrigin from_seed(std::uint64_t s) { return {true, s, Point::Zero()}; }
  static OrbitOrigin from_point(const Point& p) { return {false, 0, p}; }
};

class OriginStream {
 public:
  OriginStream(const SystemSpec& sys, const OrbitOrigin& origin);
  const Point& current() const;
  void advance();

 private:
  std::optional<OrbitStream> seeded_;
  SystemSpec sys_;
  Point x_;
  bool fixed_ = false;
};

// Geometric checkpoint schedule: consecutive n differ by <= the ratio, so
// together with the 1/n drift bound no empirical measure between
// checkpoints strays far from a checkpointed one. Always includes n_max.
std::vector<long> checkpoint_schedule(long n_start, double ratio, long n_max);

struct Checkpoint {
  long n = 0;
  Eigen::VectorXd signature;  // basis integrals of the histogram-backed mu_n
  double gap = 0.0;           // dist(mu_n, mu_{n+1}); always < 1/n
};

// The time-average sequence mu_n = (1/n) sum_{j<n} delta_{f^j(x)}, kept as
// one histogram accumulator plus basis signatures at the checkpoints.
struct EmpiricalSequence {
  SystemSpec system;
  OrbitOrigin origin;
  Point x0;
  long n_max = 0;
  HistogramGrid grid;
  std::vector<Checkpoint> checkpoints;
  Eigen::VectorXd final_counts;  // integer-valued visit counts at n_max
};

EmpiricalSequence empirical_sequence(const SystemSpec& sys, const OrbitOrigin& origin,
                                     long n_max, const std::vector<long>& schedule,
                                     const BasisTable& table);

// dist(mu_n, mu_{n+1}) for arbitrary n, recomputed from the orbit.
double consecutive_gap(const EmpiricalSequence& seq, long n, const BasisTable& table);

// Re-run the orbit and materialize mu_n as a histogram measure.
ProbMeasure materialize_empirical(const SystemSpec& sys, const OrbitOrigin& origin,
                                  long n, const HistogramGrid& grid);

struct PomegaCluster {
  Eigen::VectorXd signature;  // medoid checkpoint signature
  long n = 0;                 // medoid checkpoint index (for materialization)
  int size = 0;               // member tail checkpoints
};

// Estimated pw(x): clusters of the tail checkpoints under the weak* metric.
struct PomegaEstimate {
  std::vector<PomegaCluster> clusters;
  double cluster_radius = 0.0;         // max dist of a tail checkpoint to its medoid
  long tail_n_min = 0, tail_n_max = 0;
  double oscillation_amplitude = 0.0;  // max pairwise distance among tail checkpoints
  bool converged = false;              // amplitude < convergence tolerance
};

struct PomegaOptions {
  double tail_fraction = 0.9;        // tail covers n >= (1 - fraction) * n_max
  double cluster_tolerance = 0.02;   // single-linkage merge tolerance
  double convergence_tolerance = 0.02;
  double burn_in_fraction = 0.01;    // transients never enter the clustering
  int min_tail_checkpoints = 20;
};

PomegaEstimate pomega_estimate(const EmpiricalSequence& seq, const PomegaOptions& opt,
                               const TestFunctionBasis& basis);

// Search for h > K with |dist(mu_h, mu) - lambda dist(nu, mu)| <= eps along
// the orbit of `seq` (the constructive step of the convex-like property).
// Terminates when mu, nu are genuine partial limits; otherwise exhausts the
// budget and reports the best candidate.
struct ConvexlikeResult {
  bool found = false;
  long h = 0;
  double achieved = 0.0;  // |dist(mu_h, mu) - lambda dist(nu, mu)| at h
  double target = 0.0;    // lambda dist(nu, mu)
};

ConvexlikeResult convexlike_search(const EmpiricalSequence& seq,
                                   const Eigen::VectorXd& mu_signature,
                                   const Eigen::VectorXd& nu_signature, double lambda,
                                   double eps, long K, long budget,
                                   const TestFunctionBasis& basis);

}  // namespace ergo
