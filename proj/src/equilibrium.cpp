#include "ergostat/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ergostat/rng.hpp"
#include "ergostat/systems.hpp"

namespace ergo {

ConjugacyCode::ConjugacyCode(const SystemSpec& sys, int degree,
                             std::vector<double> branch_points)
    : sys_(sys), degree_(degree), branch_points_(std::move(branch_points)) {}

int ConjugacyCode::symbol_of(double x) const {
  x = wrap01(x);
  // branch_points_ sorted with front() == 0
  int lo = 0, hi = degree_;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (x >= branch_points_[size_t(mid)]) lo = mid;
    else hi = mid;
  }
  return lo;
}

double ConjugacyCode::conjugacy_value(double x, int depth) const {
  double h = 0.0, scale = 1.0 / degree_;
  Point p(wrap01(x), 0.0);
  for (int j = 0; j < depth; ++j) {
    h += symbol_of(p.x()) * scale;
    scale /= degree_;
    p = apply_map(sys_, p);
  }
  return h;
}

ConjugacyCode build_conjugacy(const SystemSpec& sys) {
  if (!sys.derivative_available() || sys.space.kind != SpaceKind::Circle)
    throw std::invalid_argument("build_conjugacy: circle expanding maps only");
  int d_declared = 0;
  if (const auto* f = std::get_if<LinearExpanding>(&sys.family)) d_declared = f->degree;
  if (const auto* f = std::get_if<PerturbedExpanding>(&sys.family)) d_declared = f->degree;
  int d = winding_degree(sys);
  if (d != d_declared || d < 2)
    throw std::runtime_error("build_conjugacy: winding number " + std::to_string(d) +
                             " does not verify the declared degree");

  // lift F with F(0) = 0 (both families fix 0); branch points solve F = k
  auto lift = [&](double x) {
    Point img = apply_map(sys, Point(wrap01(x), 0.0));
    // reconstruct the lift value on [0,1): F(x) = image + floor contribution
    // via continuity: count full turns by sampling is unnecessary for these
    // monotone families: F(x) = d*x + periodic part with |part| < 1/2
    double base = double(d) * x;
    double frac = img.x();
    double k = std::round(base - frac);
    return k + frac;
  };
  std::vector<double> branches = {0.0};
  for (int k = 1; k < d; ++k) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (lift(mid) < double(k)) lo = mid;
      else hi = mid;
    }
    branches.push_back(0.5 * (lo + hi));
  }
  return ConjugacyCode(sys, d, std::move(branches));
}

MeasureWitness MeasureWitness::atomic(ProbMeasure measure, std::string label) {
  MeasureWitness w;
  w.kind = Kind::Atoms;
  w.atoms = std::move(measure);
  w.label = std::move(label);
  return w;
}

MeasureWitness MeasureWitness::orbit(const OrbitOrigin& origin, long n, std::string label) {
  MeasureWitness w;
  w.kind = Kind::OrbitEmpirical;
  w.origin = origin;
  w.orbit_length = n;
  w.label = std::move(label);
  return w;
}

double lyapunov_integral(const SystemSpec& sys, const ProbMeasure& mu) {
  if (!sys.derivative_available())
    throw std::runtime_error("lyapunov_integral: derivative unavailable");
  double total = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu.weights()[i] == 0.0) continue;
    total += mu.weights()[i] * log_derivative(sys, mu.location(i).x());
  }
  return total;
}

double lyapunov_integral_orbit(const SystemSpec& sys, const OrbitOrigin& origin, long n) {
  if (n < 1) throw std::invalid_argument("lyapunov_integral_orbit: n >= 1 required");
  OriginStream stream(sys, origin);
  double total = 0.0;
  for (long j = 0; j < n; ++j) {
    total += log_derivative(sys, stream.current().x());
    stream.advance();
  }
  return total / double(n);
}

EntropyEstimate entropy_atomic(const ProbMeasure& atoms) {
  if (atoms.repr() != MeasureRepr::Atoms)
    throw std::invalid_argument("entropy_atomic: atom measure required");
  EntropyEstimate e;
  e.value = 0.0;
  e.error = 0.0;
  e.method = "atomic_exact";
  return e;
}

EntropyEstimate entropy_symbolic(const SystemSpec& sys, const ConjugacyCode& code,
                                 const OrbitOrigin& origin, long n, int block_order) {
  const int d = code.degree();
  const int k = block_order;
  if (k < 2) throw std::invalid_argument("entropy_symbolic: block order must be >= 2");
  double needed = 10.0 * std::pow(double(d), double(k));
  if (double(n) < needed) {
    int reliable = int(std::floor(std::log(double(n) / 10.0) / std::log(double(d))));
    throw std::runtime_error("entropy_symbolic: undersampled blocks at order " +
                             std::to_string(k) + " (need >= " +
                             std::to_string(long(needed)) + " samples); largest reliable "
                             "order is " + std::to_string(reliable));
  }
  long m_k = long(std::llround(std::pow(double(d), double(k))));
  if (m_k > (1L << 26))
    throw std::runtime_error("entropy_symbolic: block table too large");

  std::vector<long> c_km1(size_t(m_k / d), 0), c_k(size_t(m_k), 0), c_kp1(size_t(m_k * d), 0);
  OriginStream stream(sys, origin);
  long rolling = 0;
  const long mod_kp1 = m_k * d;
  long samples = 0;
  for (long j = 0; j < n; ++j) {
    rolling = (rolling * d + code.symbol_of(stream.current().x())) % mod_kp1;
    stream.advance();
    if (j + 1 >= k + 1) {
      ++c_kp1[size_t(rolling)];
      ++c_k[size_t(rolling % m_k)];
      ++c_km1[size_t(rolling % (m_k / d))];
      ++samples;
    }
  }
  auto block_entropy = [samples](const std::vector<long>& counts) {
    double h = 0.0;
    for (long c : counts) {
      if (c == 0) continue;
      double p = double(c) / double(samples);
      h -= p * std::log(p);
    }
    return h;
  };
  EntropyEstimate e;
  e.method = "symbolic_block";
  e.block_order = k;
  e.h_km1 = block_entropy(c_km1);
  e.h_k = block_entropy(c_k);
  e.h_kp1 = block_entropy(c_kp1);
  e.value = e.h_kp1 - e.h_k;
  double slope_gap = std::abs((e.h_k - e.h_km1) - e.value);
  double bias_gap = double(m_k) * double(d - 1) / (2.0 * double(samples));
  e.error = slope_gap + bias_gap;
  return e;
}

namespace {

// Conservative Birkhoff-average error: 3 sigma / sqrt(n) with a crude serial
// correlation allowance.
double orbit_average_error(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= double(values.size() - 1);
  return 3.0 * std::sqrt(2.0 * var / double(values.size()));
}

}  // namespace

ExpandingAnalysis ply_residual(const SystemSpec& sys, const MeasureWitness& witness,
                               const PlyOptions& opt, const TestFunctionBasis& basis,
                               const BasisTable& table) {
  ExpandingAnalysis a;
  a.label = witness.label;

  if (witness.kind == MeasureWitness::Kind::Atoms) {
    const ProbMeasure& mu = *witness.atoms;
    a.entropy = entropy_atomic(mu);
    a.lyapunov = lyapunov_integral(sys, mu);
    a.lyapunov_error = 0.0;
    ProbMeasure pushed = pushforward(mu, sys);
    a.invariance_gap = weak_star_dist(mu, pushed, basis);
    a.invariance_warning = a.invariance_gap > opt.invariance_tolerance;
  } else {
    ConjugacyCode code = build_conjugacy(sys);
    a.entropy = entropy_symbolic(sys, code, witness.origin, witness.orbit_length,
                                 opt.block_order);
    OriginStream stream(sys, witness.origin);
    std::vector<double> logs;
    logs.reserve(size_t(std::min<long>(witness.orbit_length, 1 << 20)));
    double total = 0.0;
    for (long j = 0; j < witness.orbit_length; ++j) {
      double v = log_derivative(sys, stream.current().x());
      total += v;
      if (logs.size() < size_t(1 << 20)) logs.push_back(v);
      stream.advance();
    }
    a.lyapunov = total / double(witness.orbit_length);
    a.lyapunov_error = orbit_average_error(logs);
    // invariance of the empirical measure: compare with its pushforward
    ProbMeasure emp = materialize_empirical(sys, witness.origin, witness.orbit_length,
                                            table.grid());
    a.invariance_gap = weak_star_dist(emp, pushforward(emp, sys), basis);
    a.invariance_warning = a.invariance_gap > opt.invariance_tolerance;
  }

  a.residual = a.entropy.value - a.lyapunov;
  a.residual_error = a.entropy.error + a.lyapunov_error;
  a.equilibrium_candidate = std::abs(a.residual) <= a.residual_error;
  for (double r : opt.r_grid)
    a.k_r_flags.emplace_back(r, a.residual >= -r - a.residual_error);
  return a;
}

ObservableEquilibriumReport observable_subset_of_equilibrium(
    const SystemSpec& sys, const std::vector<OrbitOrigin>& representative_origins,
    const std::vector<std::string>& labels, const PlyOptions& opt,
    const TestFunctionBasis& basis, const BasisTable& table) {
  if (representative_origins.empty())
    throw std::invalid_argument("observable_subset_of_equilibrium: no representatives");
  ObservableEquilibriumReport rep;
  for (size_t i = 0; i < representative_origins.size(); ++i) {
    std::string label = i < labels.size() ? labels[i] : ("rep" + std::to_string(i));
    rep.representatives.push_back(ply_residual(
        sys, MeasureWitness::orbit(representative_origins[i], opt.orbit_length, label),
        opt, basis, table));
  }
  rep.all_candidates = true;
  for (const auto& r : rep.representatives) {
    rep.all_candidates = rep.all_candidates && r.equilibrium_candidate;
    rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(r.residual));
  }
  // entropy and the Lyapunov integral are affine in the measure, so the
  // residual of a convex combination is the combination of residuals
  for (size_t i = 0; i < rep.representatives.size(); ++i)
    for (size_t j = i + 1; j < rep.representatives.size(); ++j)
      for (double lambda : {0.25, 0.5, 0.75}) {
        ConvexComboAnalysis c;
        c.first = int(i);
        c.second = int(j);
        c.lambda = lambda;
        c.residual = lambda * rep.representatives[i].residual +
                     (1.0 - lambda) * rep.representatives[j].residual;
        c.residual_error = lambda * rep.representatives[i].residual_error +
                           (1.0 - lambda) * rep.representatives[j].residual_error;
        c.equilibrium_candidate = std::abs(c.residual) <= c.residual_error;
        rep.all_candidates = rep.all_candidates && c.equilibrium_candidate;
        rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(c.residual));
        rep.combinations.push_back(c);
      }
  return rep;
}

LargeDeviationProbe large_deviation_probe(const SystemSpec& sys, double r,
                                          const std::vector<Eigen::VectorXd>& pool,
                                          double radius, const std::vector<long>& ns,
                                          int sample_points, std::uint64_t seed,
                                          const TestFunctionBasis& basis, double slack) {
  if (pool.empty()) throw std::invalid_argument("large_deviation_probe: empty pool");
  if (ns.empty()) throw std::invalid_argument("large_deviation_probe: empty schedule");
  LargeDeviationProbe probe;
  probe.ns = ns;
  long n_max = *std::max_element(ns.begin(), ns.end());

  std::vector<long> escapes(ns.size(), 0);
  Eigen::VectorXd g(basis.order());
  for (int p = 0; p < sample_points; ++p) {
    OriginStream stream(sys, OrbitOrigin::from_seed(derive_seed(seed, std::uint64_t(p))));
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(basis.order());
    size_t next = 0;
    std::vector<size_t> order(ns.size());
    // ns may be unsorted; process in ascending order
    std::vector<long> sorted_ns = ns;
    std::sort(sorted_ns.begin(), sorted_ns.end());
    for (long j = 1; j <= n_max && next < sorted_ns.size(); ++j) {
      basis.eval_all(stream.current(), g);
      sum += g;
      stream.advance();
      while (next < sorted_ns.size() && j == sorted_ns[next]) {
        Eigen::VectorXd sig = sum / double(j);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& k : pool)
          best = std::min(best, basis.signature_distance(sig, k));
        if (best > radius) {
          auto it = std::find(ns.begin(), ns.end(), sorted_ns[next]);
          ++escapes[size_t(it - ns.begin())];
        }
        ++next;
      }
    }
  }
  probe.consistent = true;
  for (size_t i = 0; i < ns.size(); ++i) {
    double frac = double(escapes[i]) / double(sample_points);
    probe.escape_fraction.push_back(frac);
    double rate = frac > 0.0 ? std::log(frac) / double(ns[i])
                             : std::numeric_limits<double>::quiet_NaN();
    probe.rate.push_back(rate);
    // the bound is asymptotic; check it where fractions are measurable and
    // n is large enough that (1/n) log of a single sample resolves r
    bool measurable = frac > 0.0 && double(ns[i]) * r >= 2.0;
    if (measurable && rate > -r + slack) probe.consistent = false;
  }
  long last_idx = long(std::max_element(ns.begin(), ns.end()) - ns.begin());
  probe.all_in_neighborhood = escapes[size_t(last_idx)] == 0;
  return probe;
}

}  // namespace ergo
