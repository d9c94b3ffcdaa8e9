#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "ergostat/equilibrium.hpp"

using namespace ergo;

namespace {

struct Fixture {
  TestFunctionBasis basis;
  HistogramGrid grid;
  BasisTable table;
  Fixture() : basis(circle_space(), 64), grid{circle_space(), 1024}, table(basis, grid) {}
};

Fixture& fx() {
  static Fixture f;
  return f;
}

// Independent block-entropy reference: plain map-based counting over an
// i.i.d. fair-bit stream, the exact symbol statistics of a Lebesgue-typical
// doubling orbit.
double iid_bits_block_slope(long n, int k, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<int> bits(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) bits[size_t(i)] = int(gen() & 1ULL);
  auto entropy_of = [&](int len) {
    std::map<long, long> counts;
    long code = 0, mask = (1L << len) - 1, total = 0;
    for (long i = 0; i < n; ++i) {
      code = ((code << 1) | bits[size_t(i)]) & mask;
      if (i + 1 >= len) {
        ++counts[code];
        ++total;
      }
    }
    double h = 0.0;
    for (auto& [c, cnt] : counts) {
      double p = double(cnt) / double(total);
      h -= p * std::log(p);
    }
    return h;
  };
  return entropy_of(k + 1) - entropy_of(k);
}

ProbMeasure periodic_atoms(const std::vector<double>& xs) {
  Eigen::Matrix2Xd pts = Eigen::Matrix2Xd::Zero(2, long(xs.size()));
  for (size_t i = 0; i < xs.size(); ++i) pts(0, long(i)) = xs[i];
  return ProbMeasure::atoms(circle_space(), pts,
                            Eigen::VectorXd::Constant(long(xs.size()),
                                                      1.0 / double(xs.size())));
}

}  // namespace

TEST_CASE("lyapunov integrals: constant-derivative and closed forms") {
  SystemSpec g2 = make_linear_expanding(2);
  SystemSpec g3 = make_linear_expanding(3);
  ProbMeasure lebesgue = ProbMeasure::uniform_histogram(fx().grid);
  CHECK(lyapunov_integral(g2, lebesgue) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(lyapunov_integral(g3, ProbMeasure::delta(circle_space(), Point(0.2, 0.0))) ==
        doctest::Approx(std::log(3.0)));

  SystemSpec pert = make_perturbed_expanding(2, 0.3);
  CHECK(lyapunov_integral(pert, ProbMeasure::delta(circle_space(), Point(0.0, 0.0))) ==
        doctest::Approx(std::log(2.3)));

  // quadrature against the closed form int_0^1 log(2 + eps cos 2 pi x) dx
  double closed = std::log((2.0 + std::sqrt(4.0 - 0.09)) / 2.0);
  CHECK(lyapunov_integral(pert, lebesgue) == doctest::Approx(closed).epsilon(1e-5));
}

TEST_CASE("conjugacy coding: identity for g_d, monotone residual for perturbed") {
  SystemSpec g2 = make_linear_expanding(2);
  ConjugacyCode code2 = build_conjugacy(g2);
  CHECK(code2.degree() == 2);
  const int k = 20;
  for (double x : {0.03, 0.2, 0.41, 0.77, 0.98})
    CHECK(std::abs(code2.conjugacy_value(x, k) - x) <= 2.0 * std::pow(2.0, -k));

  SystemSpec g3 = make_linear_expanding(3);
  ConjugacyCode code3 = build_conjugacy(g3);
  for (double x : {0.1, 0.5, 0.9})
    CHECK(std::abs(code3.conjugacy_value(x, 13) - x) <= 3.0 * std::pow(3.0, -13));

  SystemSpec pert = make_perturbed_expanding(2, 0.3);
  ConjugacyCode code = build_conjugacy(pert);
  CHECK(code.degree() == 2);
  // monotone on a grid
  double prev = -1.0;
  for (int i = 0; i < 200; ++i) {
    double h = code.conjugacy_value(double(i) / 200.0, k);
    CHECK(h >= prev - 1e-12);
    prev = h;
  }
  // semi-conjugacy residual |h(f(x)) - g_2(h(x))| <= 2 * 2^-k
  for (double x : {0.12, 0.34, 0.56, 0.78, 0.9}) {
    double hf = code.conjugacy_value(apply_map(pert, Point(x, 0.0)).x(), k);
    double gh = wrap01(2.0 * code.conjugacy_value(x, k));
    CHECK(std::abs(hf - gh) <= 2.0 * std::pow(2.0, -k) + 1e-12);
  }
}

TEST_CASE("block entropy: iid-bit oracle and the doubling orbit both give log 2") {
  // the estimator formula on an independent i.i.d. stream implementation
  double oracle = iid_bits_block_slope(300000, 10, 99);
  CHECK(std::abs(oracle - std::log(2.0)) <= 0.02);

  // the library estimator on a digit-stream doubling orbit
  SystemSpec g2 = make_linear_expanding(2);
  ConjugacyCode code = build_conjugacy(g2);
  auto est = entropy_symbolic(g2, code, OrbitOrigin::from_seed(12345), 300000, 10);
  CHECK(est.method == "symbolic_block");
  CHECK(std::abs(est.value - std::log(2.0)) <= 0.02);
  CHECK(est.error < 0.05);

  SystemSpec g3 = make_linear_expanding(3);
  ConjugacyCode code3 = build_conjugacy(g3);
  auto est3 = entropy_symbolic(g3, code3, OrbitOrigin::from_seed(7), 300000, 6);
  CHECK(std::abs(est3.value - std::log(3.0)) <= 0.03);
}

TEST_CASE("block entropy refuses undersampled orders") {
  SystemSpec g2 = make_linear_expanding(2);
  ConjugacyCode code = build_conjugacy(g2);
  CHECK_THROWS_WITH_AS(
      entropy_symbolic(g2, code, OrbitOrigin::from_seed(1), 5000, 12),
      doctest::Contains("largest reliable order"), std::runtime_error);
}

TEST_CASE("atomic entropy is exactly zero") {
  auto e = entropy_atomic(periodic_atoms({1.0 / 3.0, 2.0 / 3.0}));
  CHECK(e.value == 0.0);
  CHECK(e.error == 0.0);
}

TEST_CASE("ply residual: Lebesgue-typical doubling orbit is an equilibrium candidate") {
  SystemSpec g2 = make_linear_expanding(2);
  PlyOptions opt;
  opt.block_order = 10;
  opt.orbit_length = 200000;
  auto a = ply_residual(g2, MeasureWitness::orbit(OrbitOrigin::from_seed(3), 200000,
                                                  "lebesgue-typical"),
                        opt, fx().basis, fx().table);
  CHECK(a.lyapunov == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(std::abs(a.residual) <= 0.05);
  CHECK(a.equilibrium_candidate);
  CHECK_FALSE(a.invariance_warning);
  // K_r nesting: once a member, always a member for larger r
  bool seen = false;
  for (auto& [r, member] : a.k_r_flags) {
    if (seen) CHECK(member);
    seen = seen || member;
  }
  CHECK(a.k_r_flags.back().second);
}

TEST_CASE("ply residual: delta_0 under g_2 gives V = -log 2 exactly") {
  SystemSpec g2 = make_linear_expanding(2);
  PlyOptions opt;
  auto a = ply_residual(g2, MeasureWitness::atomic(periodic_atoms({0.0}), "delta_0"),
                        opt, fx().basis, fx().table);
  CHECK(a.entropy.value == 0.0);
  CHECK(a.residual == doctest::Approx(-std::log(2.0)));
  CHECK_FALSE(a.equilibrium_candidate);
  CHECK_FALSE(a.invariance_warning);  // delta_0 is invariant
  // K_r: member only for r >= log 2
  for (auto& [r, member] : a.k_r_flags)
    CHECK(member == (a.residual >= -r - a.residual_error));
}

TEST_CASE("ply residual: perturbed period-2 atoms match the closed form") {
  SystemSpec pert = make_perturbed_expanding(2, 0.3);
  // locate a genuine period-2 orbit: fixed point of f^2 that is not fixed by f
  auto f = [&](double x) { return apply_map(pert, Point(x, 0.0)).x(); };
  auto g = [&](double x) { return f(f(x)) - x; };
  double lo = 0.25, hi = 0.45;  // bracket away from the fixed points 0, 1/2...
  // scan for a sign change of f(f(x)) - x excluding fixed points of f
  double a_pt = -1;
  double prev_x = lo, prev_v = g(lo);
  for (int i = 1; i <= 1000; ++i) {
    double x = lo + (hi - lo) * double(i) / 1000.0;
    double v = g(x);
    if (prev_v == 0.0 || (prev_v > 0) != (v > 0)) {
      double a_lo = prev_x, a_hi = x;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (a_lo + a_hi);
        if ((g(a_lo) > 0) == (g(mid) > 0)) a_lo = mid;
        else a_hi = mid;
      }
      double cand = 0.5 * (a_lo + a_hi);
      if (std::abs(f(cand) - cand) > 1e-3) {  // not a fixed point of f
        a_pt = cand;
        break;
      }
    }
    prev_x = x;
    prev_v = v;
  }
  REQUIRE(a_pt >= 0.0);
  double b_pt = f(a_pt);
  REQUIRE(std::abs(f(b_pt) - a_pt) <= 1e-9);

  PlyOptions opt;
  auto analysis = ply_residual(
      pert, MeasureWitness::atomic(periodic_atoms({a_pt, b_pt}), "period-2"), opt,
      fx().basis, fx().table);
  double want = -(log_derivative(pert, a_pt) + log_derivative(pert, b_pt)) / 2.0;
  CHECK(analysis.residual == doctest::Approx(want).epsilon(1e-9));
  CHECK_FALSE(analysis.invariance_warning);
}

TEST_CASE("large deviation probe: trivial neighborhoods behave as stated") {
  SystemSpec g2 = make_linear_expanding(2);
  Eigen::VectorXd lebesgue =
      fx().basis.signature(ProbMeasure::uniform_histogram(fx().grid));
  std::vector<Eigen::VectorXd> pool = {lebesgue};

  // neighborhood = everything: no escapes at any n
  auto all = large_deviation_probe(g2, 0.1, pool, 2.0, {1, 10, 100}, 200, 5, fx().basis);
  for (double f : all.escape_fraction) CHECK(f == 0.0);
  CHECK(all.all_in_neighborhood);
  CHECK(all.consistent);

  // n = 1, tiny neighborhood: single-atom empirical measures sit far away
  auto tiny = large_deviation_probe(g2, 0.1, pool, 0.01, {1}, 200, 5, fx().basis);
  CHECK(tiny.escape_fraction[0] > 0.95);

  // generous neighborhood at growing n: escape fraction decays to zero
  auto gen = large_deviation_probe(g2, 0.1, pool, 0.1, {10, 100, 1000, 10000}, 200, 5,
                                   fx().basis);
  CHECK(gen.escape_fraction.back() == 0.0);
  CHECK(gen.consistent);
}

TEST_CASE("ruelle inequality across a small invariant pool") {
  SystemSpec pert = make_perturbed_expanding(2, 0.3);
  PlyOptions opt;
  opt.block_order = 8;
  opt.orbit_length = 100000;

  std::vector<ExpandingAnalysis> pool;
  pool.push_back(ply_residual(
      pert, MeasureWitness::atomic(periodic_atoms({0.0}), "delta_0"), opt,
      fx().basis, fx().table));
  for (std::uint64_t s : {11ULL, 12ULL, 13ULL})
    pool.push_back(ply_residual(
        pert, MeasureWitness::orbit(OrbitOrigin::from_seed(s), opt.orbit_length,
                                    "typical"),
        opt, fx().basis, fx().table));

  double max_v = -1e9;
  size_t argmax = 0;
  for (size_t i = 0; i < pool.size(); ++i) {
    // numerical Ruelle inequality: h <= L + combined error
    CHECK(pool[i].entropy.value <=
          pool[i].lyapunov + pool[i].residual_error + 1e-12);
    if (pool[i].residual > max_v) {
      max_v = pool[i].residual;
      argmax = i;
    }
  }
  // pressure zero: the max V is within error of zero, at a typical orbit
  CHECK(std::abs(max_v) <= pool[argmax].residual_error);
  CHECK(pool[argmax].label == "typical");
}

TEST_CASE("observable representatives of g_2 satisfy the PLY equality") {
  SystemSpec g2 = make_linear_expanding(2);
  PlyOptions opt;
  opt.block_order = 10;
  opt.orbit_length = 150000;
  std::vector<OrbitOrigin> reps = {OrbitOrigin::from_seed(21), OrbitOrigin::from_seed(22)};
  auto report = observable_subset_of_equilibrium(g2, reps, {"r0", "r1"}, opt,
                                                 fx().basis, fx().table);
  CHECK(report.all_candidates);
  CHECK(report.max_abs_residual <= 0.05);
  CHECK(report.combinations.size() == 3);  // one pair, three lambdas
}
