#include "ergostat/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ergostat/clustering.hpp"

namespace ergo {

OriginStream::OriginStream(const SystemSpec& sys, const OrbitOrigin& origin) : sys_(sys) {
  if (origin.seeded) {
    seeded_.emplace(sys, origin.seed);
  } else {
    fixed_ = true;
    x_ = canonicalize(sys.space, origin.x0);
    if (!contains(sys.space, x_))
      throw std::invalid_argument("orbit origin outside phase space");
  }
}

const Point& OriginStream::current() const { return fixed_ ? x_ : seeded_->current(); }

void OriginStream::advance() {
  if (fixed_) x_ = apply_map(sys_, x_);
  else seeded_->advance();
}

std::vector<long> checkpoint_schedule(long n_start, double ratio, long n_max) {
  if (n_start < 1 || n_max < n_start) throw std::invalid_argument("bad checkpoint range");
  if (!(ratio > 1.0)) throw std::invalid_argument("checkpoint ratio must exceed 1");
  std::vector<long> out;
  double v = double(n_start);
  long prev = 0;
  while (true) {
    long n = std::min(n_max, std::max(prev + 1, long(std::llround(v))));
    out.push_back(n);
    if (n >= n_max) break;
    prev = n;
    v = std::max(v * ratio, double(n) + 1.0);
  }
  return out;
}

EmpiricalSequence empirical_sequence(const SystemSpec& sys, const OrbitOrigin& origin,
                                     long n_max, const std::vector<long>& schedule,
                                     const BasisTable& table) {
  if (n_max < 1000) throw std::invalid_argument("empirical_sequence: n_max must be >= 1e3");
  if (schedule.empty() || schedule.back() != n_max)
    throw std::invalid_argument("empirical_sequence: schedule must end at n_max");

  EmpiricalSequence seq;
  seq.system = sys;
  seq.origin = origin;
  seq.n_max = n_max;
  seq.grid = table.grid();

  OriginStream stream(sys, origin);
  seq.x0 = stream.current();

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(seq.grid.bin_count());
  size_t next_cp = 0;
  seq.checkpoints.reserve(schedule.size());

  for (long j = 0; j < n_max; ++j) {
    // counts currently hold x_0 .. x_{j-1}
    if (next_cp < schedule.size() && j == schedule[next_cp]) {
      const long n = j;
      Eigen::VectorXd raw = table.signature(counts);
      Eigen::VectorXd sig = raw / double(n);
      Eigen::VectorXd sig_next =
          (raw + table.column(seq.grid.bin_of(stream.current()))) / double(n + 1);
      Checkpoint cp;
      cp.n = n;
      cp.signature = std::move(sig);
      cp.gap = 0.0;
      for (Eigen::Index i = 0; i < cp.signature.size(); ++i)
        cp.gap += std::pow(0.5, double(i + 1)) * std::abs(cp.signature[i] - sig_next[i]);
      seq.checkpoints.push_back(std::move(cp));
      ++next_cp;
    }
    counts[seq.grid.bin_of(stream.current())] += 1.0;
    stream.advance();
  }
  // final checkpoint at n_max
  {
    Eigen::VectorXd raw = table.signature(counts);
    Checkpoint cp;
    cp.n = n_max;
    cp.signature = raw / double(n_max);
    Eigen::VectorXd sig_next =
        (raw + table.column(seq.grid.bin_of(stream.current()))) / double(n_max + 1);
    cp.gap = 0.0;
    for (Eigen::Index i = 0; i < cp.signature.size(); ++i)
      cp.gap += std::pow(0.5, double(i + 1)) * std::abs(cp.signature[i] - sig_next[i]);
    seq.checkpoints.push_back(std::move(cp));
  }
  seq.final_counts = std::move(counts);
  return seq;
}

double consecutive_gap(const EmpiricalSequence& seq, long n, const BasisTable& table) {
  if (n < 1 || n + 1 > seq.n_max + 1)
    throw std::invalid_argument("consecutive_gap: n out of materializable range");
  for (const auto& cp : seq.checkpoints)
    if (cp.n == n) return cp.gap;

  OriginStream stream(seq.system, seq.origin);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(seq.grid.bin_count());
  for (long j = 0; j < n; ++j) {
    counts[seq.grid.bin_of(stream.current())] += 1.0;
    stream.advance();
  }
  Eigen::VectorXd raw = table.signature(counts);
  Eigen::VectorXd sig_n = raw / double(n);
  Eigen::VectorXd sig_next =
      (raw + table.column(seq.grid.bin_of(stream.current()))) / double(n + 1);
  double gap = 0.0;
  for (Eigen::Index i = 0; i < sig_n.size(); ++i)
    gap += std::pow(0.5, double(i + 1)) * std::abs(sig_n[i] - sig_next[i]);
  return gap;
}

ProbMeasure materialize_empirical(const SystemSpec& sys, const OrbitOrigin& origin,
                                  long n, const HistogramGrid& grid) {
  if (n < 1) throw std::invalid_argument("materialize_empirical: n must be >= 1");
  OriginStream stream(sys, origin);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(grid.bin_count());
  for (long j = 0; j < n; ++j) {
    counts[grid.bin_of(stream.current())] += 1.0;
    stream.advance();
  }
  return ProbMeasure::histogram(grid, counts / double(n));
}

PomegaEstimate pomega_estimate(const EmpiricalSequence& seq, const PomegaOptions& opt,
                               const TestFunctionBasis& basis) {
  if (!(opt.tail_fraction > 0.0 && opt.tail_fraction < 1.0))
    throw std::invalid_argument("pomega: tail fraction outside (0,1)");

  const double tail_start =
      std::max((1.0 - opt.tail_fraction) * double(seq.n_max),
               opt.burn_in_fraction * double(seq.n_max));
  std::vector<int> tail;
  for (int i = 0; i < int(seq.checkpoints.size()); ++i)
    if (double(seq.checkpoints[size_t(i)].n) >= tail_start) tail.push_back(i);

  if (int(tail.size()) < opt.min_tail_checkpoints)
    throw std::runtime_error("pomega: only " + std::to_string(tail.size()) +
                             " tail checkpoints, need >= " +
                             std::to_string(opt.min_tail_checkpoints) +
                             " (densify the schedule or extend the orbit)");

  const int m = int(tail.size());
  Eigen::MatrixXd dist(m, m);
  for (int i = 0; i < m; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < m; ++j) {
      double d = basis.signature_distance(seq.checkpoints[size_t(tail[size_t(i)])].signature,
                                          seq.checkpoints[size_t(tail[size_t(j)])].signature);
      dist(i, j) = dist(j, i) = d;
    }
  }

  PomegaEstimate est;
  est.tail_n_min = seq.checkpoints[size_t(tail.front())].n;
  est.tail_n_max = seq.checkpoints[size_t(tail.back())].n;
  est.oscillation_amplitude = dist.maxCoeff();
  est.converged = est.oscillation_amplitude < opt.convergence_tolerance;

  Clustering cl = cluster_single_linkage(dist, opt.cluster_tolerance);
  for (size_t c = 0; c < cl.clusters.size(); ++c) {
    const auto& members = cl.clusters[c];
    int med = cl.medoids[c];
    PomegaCluster pc;
    pc.signature = seq.checkpoints[size_t(tail[size_t(med)])].signature;
    pc.n = seq.checkpoints[size_t(tail[size_t(med)])].n;
    pc.size = int(members.size());
    for (int i : members)
      est.cluster_radius = std::max(est.cluster_radius, dist(i, med));
    est.clusters.push_back(std::move(pc));
  }
  return est;
}

ConvexlikeResult convexlike_search(const EmpiricalSequence& seq,
                                   const Eigen::VectorXd& mu_signature,
                                   const Eigen::VectorXd& nu_signature, double lambda,
                                   double eps, long K, long budget,
                                   const TestFunctionBasis& basis) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("convexlike_search: lambda outside [0,1]");
  if (K < 0 || budget <= K) throw std::invalid_argument("convexlike_search: bad K/budget");

  ConvexlikeResult res;
  res.target = lambda * basis.signature_distance(nu_signature, mu_signature);

  OriginStream stream(seq.system, seq.origin);
  const int order = basis.order();
  Eigen::VectorXd running = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd g(order);
  const Eigen::VectorXd& w = basis.metric_weights();

  double best = std::numeric_limits<double>::infinity();
  for (long n = 1; n <= budget; ++n) {
    basis.eval_all(stream.current(), g);
    running += g;
    stream.advance();
    if (n <= K) continue;
    double d = (w.array() * (running / double(n) - mu_signature).array().abs()).sum();
    double err = std::abs(d - res.target);
    if (err < best) {
      best = err;
      res.h = n;
      res.achieved = err;
    }
    if (err <= eps) {
      res.found = true;
      return res;
    }
  }
  res.found = false;
  return res;
}

}  // namespace ergo
