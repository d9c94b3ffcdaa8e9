#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ergo {

// Points are always stored as Vector2d; one-dimensional spaces use only x.
using Point = Eigen::Vector2d;

enum class SpaceKind { Circle, Interval01, Square01, Torus2 };

struct PhaseSpace {
  SpaceKind kind = SpaceKind::Circle;

  int dimension() const {
    return (kind == SpaceKind::Circle || kind == SpaceKind::Interval01) ? 1 : 2;
  }
  bool periodic() const {
    return kind == SpaceKind::Circle || kind == SpaceKind::Torus2;
  }
  bool operator==(const PhaseSpace& o) const { return kind == o.kind; }
  bool operator!=(const PhaseSpace& o) const { return kind != o.kind; }
};

inline PhaseSpace circle_space() { return {SpaceKind::Circle}; }
inline PhaseSpace interval_space() { return {SpaceKind::Interval01}; }
inline PhaseSpace square_space() { return {SpaceKind::Square01}; }
inline PhaseSpace torus_space() { return {SpaceKind::Torus2}; }

// Reduce to [0,1) by flooring; valid for any finite input (also negatives).
inline double wrap01(double x) {
  double w = x - std::floor(x);
  return (w >= 1.0) ? 0.0 : w;  // guards x == -1e-17 style roundoff
}

// Wrap periodic coordinates, leave bounded ones untouched.
inline Point canonicalize(const PhaseSpace& s, Point p) {
  switch (s.kind) {
    case SpaceKind::Circle: p.x() = wrap01(p.x()); p.y() = 0.0; break;
    case SpaceKind::Interval01: p.y() = 0.0; break;
    case SpaceKind::Torus2: p.x() = wrap01(p.x()); p.y() = wrap01(p.y()); break;
    case SpaceKind::Square01: break;
  }
  return p;
}

inline bool contains(const PhaseSpace& s, const Point& p) {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  auto in01open = [](double v) { return v >= 0.0 && v < 1.0; };
  switch (s.kind) {
    case SpaceKind::Circle: return in01open(p.x()) && p.y() == 0.0;
    case SpaceKind::Interval01: return in01(p.x()) && p.y() == 0.0;
    case SpaceKind::Square01: return in01(p.x()) && in01(p.y());
    case SpaceKind::Torus2: return in01open(p.x()) && in01open(p.y());
  }
  return false;
}

// Distance respecting periodicity, used for epsilon-neighborhoods in M.
inline double space_distance(const PhaseSpace& s, const Point& a, const Point& b) {
  auto axis = [&](double u, double v, bool per) {
    double d = std::abs(u - v);
    if (per) d = std::min(d, 1.0 - d);
    return d;
  };
  bool per = s.periodic();
  double dx = axis(a.x(), b.x(), per);
  if (s.dimension() == 1) return dx;
  double dy = axis(a.y(), b.y(), per);
  return std::hypot(dx, dy);
}

inline std::string space_name(const PhaseSpace& s) {
  switch (s.kind) {
    case SpaceKind::Circle: return "circle";
    case SpaceKind::Interval01: return "interval01";
    case SpaceKind::Square01: return "square01";
    case SpaceKind::Torus2: return "torus2";
  }
  return "?";
}

inline PhaseSpace space_from_name(const std::string& name) {
  if (name == "circle") return circle_space();
  if (name == "interval01") return interval_space();
  if (name == "square01") return square_space();
  if (name == "torus2") return torus_space();
  throw std::invalid_argument("unknown phase space: " + name);
}

}  // namespace ergo
