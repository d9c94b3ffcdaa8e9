#include <doctest.h>

#include <random>
#include <sstream>

#include "ergostat/measure.hpp"
#include "ergostat/measure_io.hpp"
#include "ergostat/systems.hpp"

using namespace ergo;

TEST_CASE("measure construction validates weights and geometry") {
  Eigen::Matrix2Xd pts = Eigen::Matrix2Xd::Zero(2, 2);
  pts(0, 0) = 0.25; pts(0, 1) = 0.75;
  Eigen::VectorXd good(2); good << 0.5, 0.5;
  CHECK_NOTHROW(ProbMeasure::atoms(circle_space(), pts, good));

  Eigen::VectorXd bad_sum(2); bad_sum << 0.5, 0.4;
  CHECK_THROWS_AS(ProbMeasure::atoms(circle_space(), pts, bad_sum), std::invalid_argument);

  Eigen::VectorXd negative(2); negative << 1.5, -0.5;
  CHECK_THROWS_AS(ProbMeasure::atoms(circle_space(), pts, negative), std::invalid_argument);

  Eigen::Matrix2Xd outside = pts;
  outside(0, 0) = 1.5;  // interval does not wrap
  CHECK_THROWS_AS(ProbMeasure::atoms(interval_space(), outside, good), std::invalid_argument);
  // the circle does
  CHECK_NOTHROW(ProbMeasure::atoms(circle_space(), outside, good));
}

TEST_CASE("convex_combine endpoint and midpoint cases") {
  ProbMeasure a = ProbMeasure::delta(circle_space(), Point(0.2, 0.0));
  ProbMeasure b = ProbMeasure::delta(circle_space(), Point(0.7, 0.0));

  ProbMeasure m0 = convex_combine(0.0, a, b);
  CHECK(m0.size() == 1);
  CHECK(m0.atom_points()(0, 0) == 0.7);

  ProbMeasure m1 = convex_combine(1.0, a, b);
  CHECK(m1.atom_points()(0, 0) == 0.2);

  ProbMeasure mh = convex_combine(0.5, a, b);
  REQUIRE(mh.size() == 2);
  CHECK(mh.weights()[0] == 0.5);
  CHECK(mh.weights()[1] == 0.5);
  CHECK(mh.atom_points()(0, 0) == 0.2);
  CHECK(mh.atom_points()(0, 1) == 0.7);

  CHECK_THROWS_AS(convex_combine(1.2, a, b), std::invalid_argument);
  CHECK_THROWS_AS(convex_combine(-0.1, a, b), std::invalid_argument);
}

TEST_CASE("support_estimate basics") {
  ProbMeasure d0 = ProbMeasure::delta(circle_space(), Point(0.0, 0.0));
  auto s = support_estimate(d0, 0.05);
  CHECK(s.indices.size() == 1);
  CHECK(s.covered_mass == 1.0);

  HistogramGrid grid{circle_space(), 64};
  ProbMeasure uniform = ProbMeasure::uniform_histogram(grid);
  auto su = support_estimate(uniform, 0.01);
  CHECK(su.indices.size() == 64);  // 1 - 1/64 < 0.99 forces every bin
  CHECK(su.lebesgue_measure == doctest::Approx(1.0));

  CHECK_THROWS_AS(support_estimate(d0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(support_estimate(d0, 1.0), std::invalid_argument);
}

TEST_CASE("feigenbaum reference measure: generation structure") {
  for (int n : {1, 3, 6}) {
    auto intervals = feigenbaum_intervals(n);
    ProbMeasure mu = feigenbaum_reference_measure(n);
    const long count = 1L << n;
    REQUIRE(long(intervals.size()) == count);
    REQUIRE(mu.size() == count);

    // pairwise disjoint
    auto sorted = intervals;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 1; i < sorted.size(); ++i)
      CHECK(sorted[i - 1].second < sorted[i].first);

    // nesting: both children of K_{i,n} inside it, each carrying half its mass
    if (n < 6) {
      auto children = feigenbaum_intervals(n + 1);
      for (long i = 0; i < count; ++i) {
        for (long child : {i, i + count}) {
          CHECK(children[size_t(child)].first >= intervals[size_t(i)].first - 1e-15);
          CHECK(children[size_t(child)].second <= intervals[size_t(i)].second + 1e-15);
        }
      }
    }

    // support_estimate finds exactly the 2^n atoms of mass 2^-n
    auto sup = support_estimate(mu, 1.0 / double(2 * count));
    CHECK(long(sup.indices.size()) == count);
  }
}

TEST_CASE("measure io: atoms round trip exactly") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& space : {circle_space(), square_space()}) {
    int n = 5;
    Eigen::Matrix2Xd pts = Eigen::Matrix2Xd::Zero(2, n);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
      pts(0, i) = u(gen) * 0.99;
      if (space.dimension() == 2) pts(1, i) = u(gen) * 0.99;
      w[i] = u(gen) + 0.01;
    }
    w /= w.sum();
    ProbMeasure mu = ProbMeasure::atoms(space, pts, w);

    std::stringstream ss;
    write_measure(ss, mu);
    ProbMeasure back = read_measure(ss);
    REQUIRE(back.size() == mu.size());
    for (int i = 0; i < n; ++i) {
      CHECK(back.atom_points()(0, i) == mu.atom_points()(0, i));
      CHECK(back.atom_points()(1, i) == mu.atom_points()(1, i));
      CHECK(back.weights()[i] == mu.weights()[i]);
    }

    // second serialization is byte-identical (decimal-string level)
    std::stringstream ss2;
    write_measure(ss2, back);
    std::stringstream ss3;
    write_measure(ss3, mu);
    CHECK(ss2.str() == ss3.str());
  }
}

TEST_CASE("measure io: histogram round trip exactly") {
  HistogramGrid grid{torus_space(), 16};
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.bin_count());
  w[0] = 0.125; w[17] = 0.375; w[255] = 0.5;
  ProbMeasure mu = ProbMeasure::histogram(grid, w);
  std::stringstream ss;
  write_measure(ss, mu);
  ProbMeasure back = read_measure(ss);
  CHECK(back.grid().resolution == 16);
  CHECK((back.weights() - mu.weights()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("measure io: malformed files produce line diagnostics") {
  auto parse = [](const std::string& text) {
    std::stringstream ss(text);
    return read_measure(ss);
  };

  CHECK_THROWS_AS(parse(""), MeasureParseError);
  CHECK_THROWS_AS(parse("bogus header\n"), MeasureParseError);

  // weights summing to 0.9 -> normalization error
  CHECK_THROWS_AS(parse("ergostat-measure v1\nspace circle\nrepr atoms\ncount 2\n"
                        "0.25 0.45\n0.5 0.45\n"),
                  MeasureParseError);

  // negative histogram bin
  CHECK_THROWS_AS(parse("ergostat-measure v1\nspace circle\nrepr histogram\n"
                        "resolution 8\nnonzero 2\n0 1.5\n3 -0.5\n"),
                  MeasureParseError);

  // non-numeric field
  CHECK_THROWS_AS(parse("ergostat-measure v1\nspace circle\nrepr atoms\ncount 1\nfoo 1.0\n"),
                  MeasureParseError);

  try {
    parse("ergostat-measure v1\nspace circle\nrepr atoms\ncount 1\nfoo 1.0\n");
  } catch (const MeasureParseError& e) {
    CHECK(e.line() == 5);
  }
}
