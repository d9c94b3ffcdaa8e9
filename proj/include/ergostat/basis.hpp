#pragma once

#include <Eigen/Core>
#include <vector>

#include "ergostat/measure.hpp"
#include "ergostat/phase_space.hpp"

namespace ergo {

// Countable test-function family {g_i} with sup-norm <= 1, dense enough in
// the unit ball to metrize the weak* topology:
//
//   dist(a, b) = sum_{i=1..order} 2^{-i} | int g_i da - int g_i db |
//
// Families: circle -> {1, cos 2pi kx, sin 2pi kx} interleaved; interval ->
// Chebyshev T_k(2x-1); two-dimensional spaces -> products of the axis
// families enumerated by diagonals (x-major within each diagonal). g_1 is the constant 1 in every family,
// which pins the consecutive-average bound dist(mu_n, mu_{n+1}) < 1/n.
class TestFunctionBasis {
 public:
  explicit TestFunctionBasis(const PhaseSpace& space, int order = 64);

  const PhaseSpace& space() const { return space_; }
  int order() const { return order_; }

  // 2^{-i} for i = 1..order.
  const Eigen::VectorXd& metric_weights() const { return metric_weights_; }

  // Truncating the series at `order` changes any distance by at most this.
  double truncation_error_bound() const { return 2.0 * std::pow(0.5, order_); }

  // Evaluate every g_i at a point (recurrence-based, no per-harmonic trig).
  void eval_all(const Point& p, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd eval_all(const Point& p) const;

  // Signature of a measure: the vector of integrals (int g_i dmu)_i.
  // Histogram measures integrate as mass at bin centers.
  Eigen::VectorXd signature(const ProbMeasure& mu) const;

  double signature_distance(const Eigen::VectorXd& sa, const Eigen::VectorXd& sb) const {
    return (metric_weights_.array() * (sa - sb).array().abs()).sum();
  }

 private:
  void eval_axis(double x, bool periodic_axis, Eigen::Ref<Eigen::VectorXd> out) const;

  PhaseSpace space_;
  int order_;
  int axis_order_ = 0;                         // per-axis family size (2-D)
  std::vector<std::pair<int, int>> pairs_;     // diagonal enumeration (2-D)
  Eigen::VectorXd metric_weights_;
};

// Precomputed basis values at histogram bin centers; turns signatures into
// a single mat-vec on the hot paths.
class BasisTable {
 public:
  BasisTable(const TestFunctionBasis& basis, const HistogramGrid& grid);

  const HistogramGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }  // order x bins

  Eigen::VectorXd signature(const Eigen::VectorXd& bin_weights) const {
    return values_ * bin_weights;
  }
  Eigen::VectorXd column(Eigen::Index bin) const { return values_.col(bin); }

 private:
  HistogramGrid grid_;
  Eigen::MatrixXd values_;
};

// The metric of the appendix. Throws std::invalid_argument on phase-space
// mismatch between the measures or the basis.
double weak_star_dist(const ProbMeasure& a, const ProbMeasure& b,
                      const TestFunctionBasis& basis);

}  // namespace ergo
