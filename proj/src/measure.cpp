#include "ergostat/measure.hpp"

#include <algorithm>
#include <numeric>

namespace ergo {

ProbMeasure convex_combine(double lambda, const ProbMeasure& a, const ProbMeasure& b) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("convex_combine: lambda outside [0,1]");
  if (a.space() != b.space())
    throw std::invalid_argument("convex_combine: phase space mismatch");
  if (lambda == 0.0) return b;
  if (lambda == 1.0) return a;
  if (a.repr() != b.repr())
    throw std::invalid_argument("convex_combine: representation mismatch");

  if (a.repr() == MeasureRepr::Histogram) {
    if (a.grid().resolution != b.grid().resolution)
      throw std::invalid_argument("convex_combine: histogram resolution mismatch");
    Eigen::VectorXd w = lambda * a.weights() + (1.0 - lambda) * b.weights();
    w /= w.sum();
    return ProbMeasure::histogram(a.grid(), std::move(w));
  }

  Eigen::Index na = a.size(), nb = b.size();
  Eigen::Matrix2Xd pts(2, na + nb);
  Eigen::VectorXd w(na + nb);
  pts.leftCols(na) = a.atom_points();
  pts.rightCols(nb) = b.atom_points();
  w.head(na) = lambda * a.weights();
  w.tail(nb) = (1.0 - lambda) * b.weights();
  w /= w.sum();
  return ProbMeasure::atoms(a.space(), std::move(pts), std::move(w));
}

SupportEstimate support_estimate(const ProbMeasure& mu, double mass_threshold) {
  if (!(mass_threshold > 0.0 && mass_threshold < 1.0))
    throw std::invalid_argument("support_estimate: threshold outside (0,1)");

  std::vector<Eigen::Index> order(static_cast<size_t>(mu.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& w = mu.weights();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return w[i] > w[j]; });

  SupportEstimate out;
  double target = 1.0 - mass_threshold;
  for (Eigen::Index idx : order) {
    if (out.covered_mass >= target) break;
    if (w[idx] <= 0.0) break;
    out.indices.push_back(idx);
    out.covered_mass += w[idx];
  }
  if (mu.repr() == MeasureRepr::Histogram)
    out.lebesgue_measure = double(out.indices.size()) * mu.grid().bin_volume();
  return out;
}

}  // namespace ergo
