#include "ergostat/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace ergo {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TestFunctionBasis::TestFunctionBasis(const PhaseSpace& space, int order)
    : space_(space), order_(order) {
  if (order < 1 || order > 256)
    throw std::invalid_argument("basis: truncation order outside [1,256]");
  metric_weights_.resize(order);
  double w = 0.5;
  for (int i = 0; i < order; ++i, w *= 0.5) metric_weights_[i] = w;

  if (space_.dimension() == 2) {
    // Diagonal enumeration of axis-index pairs: (1,1),(1,2),(2,1),(1,3),...
    pairs_.reserve(order);
    for (int d = 2; static_cast<int>(pairs_.size()) < order; ++d)
      for (int i = d - 1; i >= 1 && static_cast<int>(pairs_.size()) < order; --i)
        pairs_.emplace_back(i, d - i);
    for (auto& [i, j] : pairs_) axis_order_ = std::max({axis_order_, i, j});
  }
}

void TestFunctionBasis::eval_axis(double x, bool periodic_axis,
                                  Eigen::Ref<Eigen::VectorXd> out) const {
  const int n = static_cast<int>(out.size());
  if (n == 0) return;
  out[0] = 1.0;
  if (n == 1) return;
  if (periodic_axis) {
    // {1, cos 2pi kx, sin 2pi kx}: Chebyshev-style recurrence on the angle.
    double c1 = std::cos(kTwoPi * x), s1 = std::sin(kTwoPi * x);
    double ck = c1, sk = s1, ckm = 1.0, skm = 0.0;
    for (int idx = 1; idx < n; ++idx) {
      int k = (idx + 1) / 2;
      if (k >= 2 && (idx % 2 == 1)) {  // advance harmonic when hitting cos_k
        double cn = 2.0 * c1 * ck - ckm;
        double sn = 2.0 * c1 * sk - skm;
        ckm = ck; skm = sk; ck = cn; sk = sn;
      }
      out[idx] = (idx % 2 == 1) ? ck : sk;
    }
  } else {
    // Chebyshev polynomials on [0,1]: T_k(2x - 1), sup-norm 1.
    double s = 2.0 * x - 1.0;
    double tk = s, tkm = 1.0;
    out[1] = s;
    for (int idx = 2; idx < n; ++idx) {
      double tn = 2.0 * s * tk - tkm;
      tkm = tk; tk = tn;
      out[idx] = tn;
    }
  }
}

void TestFunctionBasis::eval_all(const Point& p, Eigen::Ref<Eigen::VectorXd> out) const {
  if (out.size() != order_) throw std::invalid_argument("basis: bad output size");
  if (space_.dimension() == 1) {
    eval_axis(p.x(), space_.periodic(), out);
    return;
  }
  Eigen::VectorXd u(axis_order_), v(axis_order_);
  eval_axis(p.x(), space_.periodic(), u);
  eval_axis(p.y(), space_.periodic(), v);
  for (int idx = 0; idx < order_; ++idx)
    out[idx] = u[pairs_[idx].first - 1] * v[pairs_[idx].second - 1];
}

Eigen::VectorXd TestFunctionBasis::eval_all(const Point& p) const {
  Eigen::VectorXd out(order_);
  eval_all(p, out);
  return out;
}

Eigen::VectorXd TestFunctionBasis::signature(const ProbMeasure& mu) const {
  if (mu.space() != space_)
    throw std::invalid_argument("basis: measure on a different phase space");
  Eigen::VectorXd sig = Eigen::VectorXd::Zero(order_);
  Eigen::VectorXd g(order_);
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    double w = mu.weights()[i];
    if (w == 0.0) continue;
    eval_all(mu.location(i), g);
    sig.noalias() += w * g;
  }
  return sig;
}

BasisTable::BasisTable(const TestFunctionBasis& basis, const HistogramGrid& grid)
    : grid_(grid), values_(basis.order(), grid.bin_count()) {
  if (grid.space != basis.space())
    throw std::invalid_argument("basis table: grid/basis space mismatch");
  Eigen::VectorXd g(basis.order());
  for (Eigen::Index b = 0; b < grid.bin_count(); ++b) {
    basis.eval_all(grid.bin_center(b), g);
    values_.col(b) = g;
  }
}

double weak_star_dist(const ProbMeasure& a, const ProbMeasure& b,
                      const TestFunctionBasis& basis) {
  if (a.space() != b.space())
    throw std::invalid_argument("weak_star_dist: phase space mismatch");
  return basis.signature_distance(basis.signature(a), basis.signature(b));
}

}  // namespace ergo
