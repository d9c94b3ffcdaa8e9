#include <doctest.h>

#include <cmath>

#include "ergostat/clustering.hpp"
#include "ergostat/empirical.hpp"

using namespace ergo;

namespace {

struct Setup {
  TestFunctionBasis basis;
  HistogramGrid grid;
  BasisTable table;
  Setup(const PhaseSpace& space, int res)
      : basis(space, 64), grid{space, res}, table(basis, grid) {}
};

Setup& circle_setup() {
  static Setup s(circle_space(), 1024);
  return s;
}

Setup& square_setup() {
  static Setup s(square_space(), 128);
  return s;
}

}  // namespace

TEST_CASE("checkpoint schedule is geometric, strictly increasing, ends at n_max") {
  auto sched = checkpoint_schedule(10, 1.1, 100000);
  REQUIRE(!sched.empty());
  CHECK(sched.front() == 10);
  CHECK(sched.back() == 100000);
  for (size_t i = 1; i < sched.size(); ++i) {
    CHECK(sched[i] > sched[i - 1]);
    CHECK(double(sched[i]) <= 1.1 * double(sched[i - 1]) + 1.0);
  }
}

TEST_CASE("fixed point orbit: every checkpoint is the delta at 0, zero gap") {
  auto& s = circle_setup();
  SystemSpec g2 = make_linear_expanding(2);
  auto sched = checkpoint_schedule(10, 1.2, 2000);
  auto seq = empirical_sequence(g2, OrbitOrigin::from_point(Point(0.0, 0.0)), 2000, sched,
                                s.table);
  Eigen::VectorXd d0_sig = s.table.column(s.grid.bin_of(Point(0.0, 0.0)));
  for (const auto& cp : seq.checkpoints) {
    CHECK(s.basis.signature_distance(cp.signature, d0_sig) <= 1e-12);
    CHECK(cp.gap <= 1e-12);
  }
}

TEST_CASE("accumulator identity: counts at n_max sum to n_max") {
  auto& s = circle_setup();
  SystemSpec g2 = make_linear_expanding(2);
  auto sched = checkpoint_schedule(10, 1.3, 5000);
  auto seq = empirical_sequence(g2, OrbitOrigin::from_seed(17), 5000, sched, s.table);
  CHECK(seq.final_counts.sum() == 5000.0);
  // every count is a nonnegative integer
  for (Eigen::Index i = 0; i < seq.final_counts.size(); ++i) {
    CHECK(seq.final_counts[i] >= 0.0);
    CHECK(seq.final_counts[i] == std::floor(seq.final_counts[i]));
  }
}

TEST_CASE("consecutive gap obeys the 1/n bound on every gallery system") {
  struct Row {
    SystemSpec sys;
    long n_max;
  };
  const Row rows[] = {
      {make_linear_expanding(2), 20000},
      {make_linear_expanding(3), 20000},
      {make_perturbed_expanding(2, 0.3), 20000},
      {make_product_halving(), 5000},
      {build_bowen("oscillating"), 2000},
      {make_gradient_time_one(100), 1000},
  };
  for (const auto& row : rows) {
    Setup s(row.sys.space, row.sys.space.dimension() == 1 ? 1024 : 128);
    long n_max = std::max<long>(row.n_max, 1000);
    auto sched = checkpoint_schedule(10, 1.1, n_max);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      auto seq = empirical_sequence(row.sys, OrbitOrigin::from_seed(seed), n_max, sched,
                                    s.table);
      for (const auto& cp : seq.checkpoints)
        CHECK(cp.gap <= 1.0 / double(cp.n));
    }
  }
}

TEST_CASE("consecutive gap matches the two-atom closed form on exact period-2 orbits") {
  auto& s = circle_setup();

  // g_3 swaps 1/8 and 3/8, and both are exact dyadics: the double-precision
  // orbit is exactly periodic forever.
  SystemSpec g3 = make_linear_expanding(3);
  auto sched = checkpoint_schedule(10, 1.5, 1000);
  auto seq = empirical_sequence(g3, OrbitOrigin::from_point(Point(0.125, 0.0)), 1000, sched,
                                s.table);
  Eigen::VectorXd ca = s.table.column(s.grid.bin_of(Point(0.125, 0.0)));
  Eigen::VectorXd cb = s.table.column(s.grid.bin_of(Point(0.375, 0.0)));
  double datom = s.basis.signature_distance(ca, cb);
  for (long n : {20L, 50L, 100L, 400L}) {
    double gap = consecutive_gap(seq, n, s.table);
    double closed_form = datom / (2.0 * double(n + 1));
    CHECK(std::abs(gap - closed_form) <= 1e-12);
  }

  // Same closed form for g_2 on {1/3, 2/3} while the orbit is still exact.
  SystemSpec g2 = make_linear_expanding(2);
  auto seq2 = empirical_sequence(g2, OrbitOrigin::from_point(Point(1.0 / 3.0, 0.0)), 1000,
                                 sched, s.table);
  Eigen::VectorXd ca2 = s.table.column(s.grid.bin_of(Point(1.0 / 3.0, 0.0)));
  Eigen::VectorXd cb2 = s.table.column(s.grid.bin_of(Point(2.0 / 3.0, 0.0)));
  double datom2 = s.basis.signature_distance(ca2, cb2);
  double gap2 = consecutive_gap(seq2, 20, s.table);
  CHECK(std::abs(gap2 - datom2 / 42.0) <= 1e-12);
}

TEST_CASE("doubling: mu_n approaches Lebesgue; pomega has one converged cluster") {
  auto& s = circle_setup();
  SystemSpec g2 = make_linear_expanding(2);
  const long n_max = 100000;
  auto sched = checkpoint_schedule(10, 1.1, n_max);
  auto seq = empirical_sequence(g2, OrbitOrigin::from_seed(42), n_max, sched, s.table);

  Eigen::VectorXd lebesgue_sig =
      s.basis.signature(ProbMeasure::uniform_histogram(s.grid));
  CHECK(s.basis.signature_distance(seq.checkpoints.back().signature, lebesgue_sig) < 0.02);

  PomegaOptions opt;
  auto est = pomega_estimate(seq, opt, s.basis);
  CHECK(est.clusters.size() == 1);
  CHECK(est.converged);
  CHECK(est.oscillation_amplitude < 0.02);
  CHECK(s.basis.signature_distance(est.clusters[0].signature, lebesgue_sig) < 0.02);
}

TEST_CASE("product halving: single cluster at delta_(0,y0), monotone approach") {
  auto& s = square_setup();
  SystemSpec sys = make_product_halving();
  const long n_max = 10000;
  auto sched = checkpoint_schedule(10, 1.1, n_max);
  auto seq = empirical_sequence(sys, OrbitOrigin::from_seed(5), n_max, sched, s.table);
  double y0 = seq.x0.y();

  Eigen::VectorXd target = s.table.column(s.grid.bin_of(Point(0.0, y0)));
  std::vector<double> trace;
  for (const auto& cp : seq.checkpoints)
    trace.push_back(s.basis.signature_distance(cp.signature, target));
  // monotone decrease after burn-in
  size_t start = 5;
  for (size_t i = start + 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
  CHECK(trace.back() < 0.01);

  PomegaOptions opt;
  auto est = pomega_estimate(seq, opt, s.basis);
  CHECK(est.clusters.size() == 1);
  CHECK(est.converged);
  CHECK(s.basis.signature_distance(est.clusters[0].signature, target) < 0.02);
}

TEST_CASE("pomega: too few tail checkpoints is a diagnostic error") {
  auto& s = circle_setup();
  SystemSpec g2 = make_linear_expanding(2);
  auto sched = checkpoint_schedule(500, 1.4, 1000);  // very sparse
  auto seq = empirical_sequence(g2, OrbitOrigin::from_seed(1), 1000, sched, s.table);
  PomegaOptions opt;
  CHECK_THROWS_AS(pomega_estimate(seq, opt, s.basis), std::runtime_error);
}

TEST_CASE("convexlike search: endpoint lambdas on the doubling orbit") {
  auto& s = circle_setup();
  SystemSpec g2 = make_linear_expanding(2);
  const long n_max = 50000;
  auto sched = checkpoint_schedule(10, 1.1, n_max);
  auto seq = empirical_sequence(g2, OrbitOrigin::from_seed(8), n_max, sched, s.table);
  PomegaOptions opt;
  auto est = pomega_estimate(seq, opt, s.basis);
  REQUIRE(est.clusters.size() == 1);
  Eigen::VectorXd mu = est.clusters[0].signature;
  Eigen::VectorXd nu = s.basis.signature(
      ProbMeasure::delta(circle_space(), Point(0.0, 0.0)));

  // lambda = 0: mu_h within eps of mu
  auto r0 = convexlike_search(seq, mu, nu, 0.0, 0.05, 100, 200000, s.basis);
  CHECK(r0.found);
  CHECK(r0.h > 100);

  // lambda = 1: dist(mu_h, mu) within eps of dist(nu, mu). Take nu at a
  // moderate distance (an early empirical measure), so the decaying
  // dist(mu_h, mu) sweeps the target where its 1/h steps are already fine.
  Eigen::VectorXd nu_mid = seq.checkpoints[15].signature;
  double target = s.basis.signature_distance(nu_mid, mu);
  REQUIRE(target > 0.005);
  auto r1 = convexlike_search(seq, mu, nu_mid, 1.0, 0.005, 20, 200000, s.basis);
  CHECK(r1.found);
  CHECK(std::abs(r1.achieved) <= 0.005);

  // unreachable target after convergence: budget exhausts with a best candidate
  auto rbad = convexlike_search(seq, mu, nu, 1.0, 0.001, 20000, 40000, s.basis);
  CHECK_FALSE(rbad.found);
  CHECK(rbad.h > 20000);
  CHECK(rbad.achieved > 0.001);
}

TEST_CASE("clustering: single linkage chains, complete linkage splits") {
  // five points on a line at spacing 1.0, tolerance 1.2
  const int n = 5;
  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dist(i, j) = std::abs(i - j);

  auto single = cluster_single_linkage(dist, 1.2);
  CHECK(single.clusters.size() == 1);  // chained into one component

  auto complete = cluster_complete_linkage(dist, 1.2);
  CHECK(complete.clusters.size() >= 2);  // diameter cap breaks the chain

  // two tight groups far apart separate under both
  Eigen::MatrixXd d2(4, 4);
  d2.setZero();
  auto set = [&](int i, int j, double v) { d2(i, j) = d2(j, i) = v; };
  set(0, 1, 0.01); set(2, 3, 0.01);
  set(0, 2, 5.0); set(0, 3, 5.0); set(1, 2, 5.0); set(1, 3, 5.0);
  CHECK(cluster_single_linkage(d2, 0.1).clusters.size() == 2);
  CHECK(cluster_complete_linkage(d2, 0.1).clusters.size() == 2);
}

TEST_CASE("converged pomega clusters are approximately invariant measures") {
  // numerical form of: partial limits of the time-average sequence are
  // f-invariant. Slack: cluster radius plus histogram resolution effects.
  struct Row { SystemSpec sys; long n; int res; };
  const Row rows[] = {
      {make_linear_expanding(2), 60000, 1024},
      {make_product_halving(), 8000, 128},
  };
  for (const auto& row : rows) {
    Setup s(row.sys.space, row.res);
    auto sched = checkpoint_schedule(10, 1.1, row.n);
    auto seq = empirical_sequence(row.sys, OrbitOrigin::from_seed(31), row.n, sched,
                                  s.table);
    PomegaOptions opt;
    auto est = pomega_estimate(seq, opt, s.basis);
    REQUIRE(est.converged);
    for (const auto& cluster : est.clusters) {
      ProbMeasure mu = materialize_empirical(row.sys, seq.origin, cluster.n, s.grid);
      ProbMeasure pushed = pushforward(mu, row.sys);
      double d = weak_star_dist(mu, pushed, s.basis);
      CHECK(d <= est.cluster_radius + 0.02);
    }
  }
}
