#pragma once

#include <vector>

#include "ergostat/empirical.hpp"

namespace ergo {

struct WilsonInterval {
  double estimate = 0.0, low = 0.0, high = 0.0;
};
WilsonInterval wilson_interval(long successes, long trials, double z = 1.96);

struct EnsembleOptions {
  int size = 400;
  std::uint64_t seed = 2024;
  long orbit_length = 0;  // 0 -> 1e6 for 1-D systems, 1e5 for 2-D
  long checkpoint_start = 10;
  double checkpoint_ratio = 1.1;
  PomegaOptions pomega;
  int workers = 0;  // 0 -> worker_count()
};

struct EnsemblePoint {
  Point x0;
  OrbitOrigin origin;
  std::vector<Checkpoint> checkpoints;
  PomegaEstimate pomega;
};

// Lebesgue-uniform sample of initial states with their pw estimates; the
// per-point computation is a pure function of (seed, index), so results do
// not depend on the worker count.
struct InitialEnsemble {
  SystemSpec system;
  EnsembleOptions options;
  HistogramGrid grid;
  long orbit_length = 0;
  std::vector<long> schedule;
  std::vector<EnsemblePoint> points;
};

InitialEnsemble build_ensemble(const SystemSpec& sys, const EnsembleOptions& opt,
                               const BasisTable& table, const TestFunctionBasis& basis);

// ---------------------------------------------------------------------------

struct ObservabilityRow {
  double epsilon = 0.0;
  long hits = 0;
  WilsonInterval o;  // estimated observability size with confidence interval
};

struct ObservabilityProfile {
  std::vector<ObservabilityRow> rows;  // in the given grid order (descending)
  bool physical = false;
  double basin_fraction = 0.0;  // points whose pw is a single cluster near mu
};

// o_mu(eps) = fraction of sample points with some pw cluster within eps of
// mu, per epsilon in the grid. The physical flag operationalizes
// lim_{eps->0} o > 0 on the two smallest grid epsilons: o(eps_min) bounded
// away from zero (ci low > 0) and flat between them (difference within the
// summed interval half-widths and no fixed-fraction shrink relative to the
// second-smallest or mid-grid epsilon).
ObservabilityProfile observability_size(const InitialEnsemble& ens,
                                        const Eigen::VectorXd& mu_signature,
                                        const std::vector<double>& epsilon_grid,
                                        const TestFunctionBasis& basis);

struct ObservableRepresentative {
  Eigen::VectorXd signature;       // medoid cluster signature
  int source_point = 0;            // ensemble index of the medoid cluster
  long source_n = 0;               // checkpoint n of the medoid cluster
  int merged_clusters = 0;
  WilsonInterval attracting_mass;  // fraction of points owning a member cluster
};

// Pools every pw cluster across the ensemble and re-clusters (complete
// linkage, so a continuum splits into tolerance-sized representatives).
// Non-empty whenever the ensemble is.
std::vector<ObservableRepresentative> observable_set_estimate(
    const InitialEnsemble& ens, double cluster_tolerance, const TestFunctionBasis& basis);

struct MinimalityVerdict {
  bool full_basin = false;
  long escaping_points = 0;
  WilsonInterval escaping_fraction;
};

// Checks whether every sampled pw cluster lies within `radius` of the
// candidate compact set K (given as a finite net of signatures).
MinimalityVerdict minimality_check(const InitialEnsemble& ens,
                                   const std::vector<Eigen::VectorXd>& candidate_net,
                                   double radius, const TestFunctionBasis& basis);

struct UniformConvergenceReport {
  std::vector<long> ns;
  std::vector<double> sup_dist;  // sup over the subset of dist(mu_{n,x}, set)
  bool passed = false;
};

// Egoroff-style check: sup_{x in K} dist(mu_{n,x}, candidate set) must fall
// below tol along the schedule and stay below 1.25 tol afterwards.
UniformConvergenceReport uniform_convergence_check(
    const InitialEnsemble& ens, const std::vector<Eigen::VectorXd>& candidate_set,
    const std::vector<int>& subset_indices, double tol, const TestFunctionBasis& basis);

}  // namespace ergo
