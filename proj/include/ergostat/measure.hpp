#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ergostat/phase_space.hpp"

namespace ergo {

constexpr double kMassTol = 1e-12;

enum class MeasureRepr { Atoms, Histogram };

// Histogram geometry on a phase space: `resolution` bins per axis, flat
// row-major indexing (iy * resolution + ix) in two dimensions.
struct HistogramGrid {
  PhaseSpace space;
  int resolution = 1024;

  Eigen::Index bin_count() const {
    return space.dimension() == 1
               ? static_cast<Eigen::Index>(resolution)
               : static_cast<Eigen::Index>(resolution) * resolution;
  }
  Eigen::Index bin_of(const Point& p) const {
    auto clampi = [&](double v) {
      int i = static_cast<int>(v * resolution);
      if (i < 0) i = 0;
      if (i >= resolution) i = resolution - 1;
      return i;
    };
    int ix = clampi(p.x());
    if (space.dimension() == 1) return ix;
    return static_cast<Eigen::Index>(clampi(p.y())) * resolution + ix;
  }
  Point bin_center(Eigen::Index b) const {
    double h = 1.0 / resolution;
    if (space.dimension() == 1) return Point((b + 0.5) * h, 0.0);
    Eigen::Index iy = b / resolution, ix = b % resolution;
    return Point((ix + 0.5) * h, (iy + 0.5) * h);
  }
  double bin_volume() const {
    double h = 1.0 / resolution;
    return space.dimension() == 1 ? h : h * h;
  }
};

// A Borel probability measure represented either as a finite atom list or
// as a histogram on the fixed partition of the phase space. Weights are
// nonnegative and sum to one within kMassTol. Immutable after construction.
class ProbMeasure {
 public:
  static ProbMeasure atoms(const PhaseSpace& space, Eigen::Matrix2Xd points,
                           Eigen::VectorXd weights) {
    ProbMeasure m;
    m.space_ = space;
    m.repr_ = MeasureRepr::Atoms;
    m.points_ = std::move(points);
    m.weights_ = std::move(weights);
    m.validate();
    return m;
  }

  static ProbMeasure delta(const PhaseSpace& space, const Point& p) {
    Eigen::Matrix2Xd pts(2, 1);
    pts.col(0) = p;
    return atoms(space, pts, Eigen::VectorXd::Ones(1));
  }

  static ProbMeasure histogram(HistogramGrid grid, Eigen::VectorXd weights) {
    ProbMeasure m;
    m.space_ = grid.space;
    m.repr_ = MeasureRepr::Histogram;
    m.grid_ = grid;
    m.weights_ = std::move(weights);
    m.validate();
    return m;
  }

  static ProbMeasure uniform_histogram(HistogramGrid grid) {
    Eigen::Index n = grid.bin_count();
    return histogram(grid, Eigen::VectorXd::Constant(n, 1.0 / double(n)));
  }

  const PhaseSpace& space() const { return space_; }
  MeasureRepr repr() const { return repr_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::Matrix2Xd& atom_points() const { return points_; }
  const HistogramGrid& grid() const { return grid_; }
  Eigen::Index size() const { return weights_.size(); }

  // Location of the i-th weight: atom point or bin center.
  Point location(Eigen::Index i) const {
    return repr_ == MeasureRepr::Atoms ? Point(points_.col(i)) : grid_.bin_center(i);
  }

 private:
  void validate() {
    if (weights_.size() == 0)
      throw std::invalid_argument("measure: empty weight vector");
    if ((weights_.array() < 0).any())
      throw std::invalid_argument("measure: negative weight");
    double mass = weights_.sum();
    if (std::abs(mass - 1.0) > kMassTol)
      throw std::invalid_argument("measure: weights sum to " + std::to_string(mass) +
                                  ", expected 1 within 1e-12");
    if (repr_ == MeasureRepr::Atoms) {
      if (points_.cols() != weights_.size())
        throw std::invalid_argument("measure: atom/weight count mismatch");
      for (Eigen::Index i = 0; i < points_.cols(); ++i) {
        Point p = canonicalize(space_, points_.col(i));
        if (!contains(space_, p))
          throw std::invalid_argument("measure: atom outside phase space");
        points_.col(i) = p;
      }
    } else {
      if (grid_.space != space_ || weights_.size() != grid_.bin_count())
        throw std::invalid_argument("measure: histogram size mismatch");
    }
  }

  PhaseSpace space_;
  MeasureRepr repr_ = MeasureRepr::Atoms;
  Eigen::Matrix2Xd points_;
  Eigen::VectorXd weights_;
  HistogramGrid grid_;
};

// lambda*a + (1-lambda)*b. Endpoints return the input measure unchanged.
ProbMeasure convex_combine(double lambda, const ProbMeasure& a, const ProbMeasure& b);

struct SupportEstimate {
  std::vector<Eigen::Index> indices;  // bins or atoms, heaviest first
  double covered_mass = 0.0;
  double lebesgue_measure = 0.0;      // total volume of chosen bins; 0 for atoms
};

// Smallest collection of bins/atoms with total mass >= 1 - mass_threshold.
SupportEstimate support_estimate(const ProbMeasure& mu, double mass_threshold);

}  // namespace ergo
