#include "ergostat/observability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ergostat/clustering.hpp"
#include "ergostat/parallel.hpp"
#include "ergostat/rng.hpp"

namespace ergo {

WilsonInterval wilson_interval(long successes, long trials, double z) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval: empty sample");
  double n = double(trials), p = double(successes) / n, z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  WilsonInterval w;
  w.estimate = p;
  w.low = std::max(0.0, center - half);
  w.high = std::min(1.0, center + half);
  return w;
}

InitialEnsemble build_ensemble(const SystemSpec& sys, const EnsembleOptions& opt,
                               const BasisTable& table, const TestFunctionBasis& basis) {
  if (opt.size < 100)
    throw std::invalid_argument("ensemble: sample size must be >= 100");
  InitialEnsemble ens;
  ens.system = sys;
  ens.options = opt;
  ens.grid = table.grid();
  ens.orbit_length =
      opt.orbit_length > 0 ? opt.orbit_length : (sys.space.dimension() == 1 ? 1000000 : 100000);
  ens.schedule = checkpoint_schedule(opt.checkpoint_start, opt.checkpoint_ratio,
                                     ens.orbit_length);
  ens.points.resize(size_t(opt.size));

  int workers = opt.workers > 0 ? opt.workers : worker_count();
  parallel_for_indexed(opt.size, workers, [&](int i) {
    OrbitOrigin origin = OrbitOrigin::from_seed(derive_seed(opt.seed, std::uint64_t(i)));
    EmpiricalSequence seq =
        empirical_sequence(sys, origin, ens.orbit_length, ens.schedule, table);
    EnsemblePoint& pt = ens.points[size_t(i)];
    pt.origin = origin;
    pt.x0 = seq.x0;
    pt.pomega = pomega_estimate(seq, opt.pomega, basis);
    pt.checkpoints = std::move(seq.checkpoints);
  });
  return ens;
}

namespace {

double dist_to_clusters(const PomegaEstimate& est, const Eigen::VectorXd& sig,
                        const TestFunctionBasis& basis) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : est.clusters)
    best = std::min(best, basis.signature_distance(c.signature, sig));
  return best;
}

}  // namespace

ObservabilityProfile observability_size(const InitialEnsemble& ens,
                                        const Eigen::VectorXd& mu_signature,
                                        const std::vector<double>& epsilon_grid,
                                        const TestFunctionBasis& basis) {
  if (epsilon_grid.size() < 2)
    throw std::invalid_argument("observability_size: need at least two grid epsilons");
  ObservabilityProfile prof;
  const long n = long(ens.points.size());

  std::vector<double> min_dist(static_cast<size_t>(n));
  for (size_t i = 0; i < ens.points.size(); ++i)
    min_dist[i] = dist_to_clusters(ens.points[i].pomega, mu_signature, basis);

  for (double eps : epsilon_grid) {
    ObservabilityRow row;
    row.epsilon = eps;
    for (double d : min_dist) row.hits += (d < eps);
    row.o = wilson_interval(row.hits, n);
    prof.rows.push_back(row);
  }

  // physical criterion: o(eps_min) bounded away from zero and the lower
  // half of the profile flat. The flatness reference includes the mid-grid
  // epsilon, where the hit counts have statistical power; a vanishing
  // o(eps) shows itself as a systematic shrink across those grid steps.
  auto sorted = prof.rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.epsilon < b.epsilon; });
  const auto& smallest = sorted[0];
  const auto& second = sorted[1];
  const auto& mid = sorted[(sorted.size() - 1) / 2];
  double half_s = 0.5 * (smallest.o.high - smallest.o.low);
  double half_2 = 0.5 * (second.o.high - second.o.low);
  bool bounded_away = smallest.o.low > 0.0;
  bool flat = std::abs(smallest.o.estimate - second.o.estimate) <= half_s + half_2 &&
              smallest.o.estimate >= 0.6 * second.o.estimate &&
              smallest.o.estimate >= 0.6 * mid.o.estimate;
  prof.physical = bounded_away && flat;

  long basin_hits = 0;
  for (size_t i = 0; i < ens.points.size(); ++i) {
    const auto& est = ens.points[i].pomega;
    if (est.converged && est.clusters.size() == 1 && min_dist[i] < smallest.epsilon)
      ++basin_hits;
  }
  prof.basin_fraction = double(basin_hits) / double(n);
  return prof;
}

std::vector<ObservableRepresentative> observable_set_estimate(
    const InitialEnsemble& ens, double cluster_tolerance, const TestFunctionBasis& basis) {
  struct PoolEntry {
    const PomegaCluster* cluster;
    int point;
  };
  std::vector<PoolEntry> pool;
  for (size_t i = 0; i < ens.points.size(); ++i)
    for (const auto& c : ens.points[i].pomega.clusters)
      pool.push_back({&c, int(i)});
  if (pool.empty()) throw std::runtime_error("observable_set_estimate: empty cluster pool");

  const int m = int(pool.size());
  Eigen::MatrixXd dist(m, m);
  for (int i = 0; i < m; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < m; ++j) {
      double d = basis.signature_distance(pool[size_t(i)].cluster->signature,
                                          pool[size_t(j)].cluster->signature);
      dist(i, j) = dist(j, i) = d;
    }
  }
  Clustering cl = cluster_complete_linkage(dist, cluster_tolerance);

  std::vector<ObservableRepresentative> reps;
  const long n = long(ens.points.size());
  for (size_t c = 0; c < cl.clusters.size(); ++c) {
    ObservableRepresentative rep;
    const PoolEntry& med = pool[size_t(cl.medoids[c])];
    rep.signature = med.cluster->signature;
    rep.source_point = med.point;
    rep.source_n = med.cluster->n;
    rep.merged_clusters = int(cl.clusters[c].size());
    std::vector<bool> owner(size_t(n), false);
    for (int idx : cl.clusters[c]) owner[size_t(pool[size_t(idx)].point)] = true;
    long owners = std::count(owner.begin(), owner.end(), true);
    rep.attracting_mass = wilson_interval(owners, n);
    reps.push_back(std::move(rep));
  }
  // heaviest first
  std::sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) {
    return a.attracting_mass.estimate > b.attracting_mass.estimate;
  });
  return reps;
}

MinimalityVerdict minimality_check(const InitialEnsemble& ens,
                                   const std::vector<Eigen::VectorXd>& candidate_net,
                                   double radius, const TestFunctionBasis& basis) {
  if (candidate_net.empty())
    throw std::invalid_argument("minimality_check: empty candidate net");
  MinimalityVerdict v;
  for (const auto& pt : ens.points) {
    bool escapes = false;
    for (const auto& c : pt.pomega.clusters) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& k : candidate_net)
        best = std::min(best, basis.signature_distance(c.signature, k));
      if (best > radius) {
        escapes = true;
        break;
      }
    }
    v.escaping_points += escapes;
  }
  v.escaping_fraction = wilson_interval(v.escaping_points, long(ens.points.size()));
  v.full_basin = (v.escaping_points == 0);
  return v;
}

UniformConvergenceReport uniform_convergence_check(
    const InitialEnsemble& ens, const std::vector<Eigen::VectorXd>& candidate_set,
    const std::vector<int>& subset_indices, double tol, const TestFunctionBasis& basis) {
  if (candidate_set.empty() || subset_indices.empty())
    throw std::invalid_argument("uniform_convergence_check: empty inputs");
  UniformConvergenceReport rep;
  const size_t n_cp = ens.points.front().checkpoints.size();
  for (size_t k = 0; k < n_cp; ++k) {
    double sup = 0.0;
    for (int idx : subset_indices) {
      const auto& cp = ens.points[size_t(idx)].checkpoints[k];
      double best = std::numeric_limits<double>::infinity();
      for (const auto& cand : candidate_set)
        best = std::min(best, basis.signature_distance(cp.signature, cand));
      sup = std::max(sup, best);
    }
    rep.ns.push_back(ens.points.front().checkpoints[k].n);
    rep.sup_dist.push_back(sup);
  }
  // below tol eventually, and no meaningful rebound afterwards
  size_t first_below = rep.sup_dist.size();
  for (size_t k = 0; k < rep.sup_dist.size(); ++k)
    if (rep.sup_dist[k] <= tol) {
      first_below = k;
      break;
    }
  rep.passed = first_below < rep.sup_dist.size();
  for (size_t k = first_below; rep.passed && k < rep.sup_dist.size(); ++k)
    if (rep.sup_dist[k] > 1.25 * tol) rep.passed = false;
  return rep;
}

}  // namespace ergo
