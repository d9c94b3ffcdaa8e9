#include "ergostat/systems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ergo {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.1415926535897932384626433832795;

struct BowenModel {
  const BowenSaddles& p;

  // Field in model coordinates (unscaled by time_scale). Polar structure
  // r' = mu r (1-r), th' = -(g(th) + c0 (1-r)), evaluated algebraically:
  // g(th) = |sin th| (p + q cos th) needs only Y/r and X/r, with (p, q) per
  // semicircle reproducing the four angular saddle rates.
  Point field(const Point& q) const {
    const double X = q.x(), Y = q.y();
    const double r = std::sqrt(X * X + Y * Y);
    if (r < 1e-12) return Point(0.0, 0.0);
    const double rho = 1.0 - r;
    double pp, qq;
    if (Y >= 0.0) {  // upper semicircle: A -> B
      pp = 0.5 * (p.unstable_a - p.stable_b);
      qq = 0.5 * (-p.stable_b - p.unstable_a);
    } else {  // lower semicircle: B -> A
      pp = 0.5 * (p.unstable_b - p.stable_a);
      qq = 0.5 * (p.unstable_b + p.stable_a);
    }
    // mid-arc speed boost (vanishes quadratically at the saddles, so the
    // angular rates are exactly pp -/+ qq)
    const double sin2 = (Y * Y) / (r * r);
    const double g = std::abs(Y) / r * (pp + qq * X / r) * (1.0 + 3.0 * sin2);
    const double theta_dot = -(g + p.c0 * std::abs(rho));
    // radial pull with a mu-independent far-field term (rate at the circle
    // is exactly mu; keeps exterior starts inside the chart box)
    const double radial = rho * (p.mu + 40.0 * rho * rho);  // r'/r
    return Point(radial * X - theta_dot * Y, radial * Y + theta_dot * X);
  }

  Point to_model(const Point& sq) const {
    return Point(2.0 * p.chart * sq.x() - p.chart, 2.0 * p.chart * sq.y() - p.chart);
  }
  Point to_square(const Point& m) const {
    return Point((m.x() + p.chart) / (2.0 * p.chart), (m.y() + p.chart) / (2.0 * p.chart));
  }

  // One integration step of the time-one map in model coordinates. The
  // boundary circle is invariant and reached only in infinite time, but
  // per-coordinate rounding can drop an orbit exactly onto it (where it
  // would lock into a saddle). The radial guard keeps |1 - r| at least at
  // representation scale on the side the orbit came from; orbits started
  // exactly on the circle are left there.
  Point advance_model(Point q) const {
    const double h = p.time_scale / p.substeps;
    const double rho_before = 1.0 - q.norm();
    for (int i = 0; i < p.substeps; ++i) {
      Point k1 = field(q);
      Point k2 = field(q + 0.5 * h * k1);
      Point k3 = field(q + 0.5 * h * k2);
      Point k4 = field(q + h * k3);
      q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!q.allFinite() || std::abs(q.x()) > p.chart || std::abs(q.y()) > p.chart)
      throw std::runtime_error("bowen: orbit escaped the chart box");
    constexpr double kRhoFloor = 1e-12;
    double r = q.norm();
    if (rho_before != 0.0 && std::abs(1.0 - r) < kRhoFloor) {
      double side = rho_before > 0.0 ? 1.0 : -1.0;
      q *= (1.0 - side * kRhoFloor) / r;
    }
    return q;
  }

  Point time_one(const Point& sq) const { return to_square(advance_model(to_model(sq))); }
};

double gradient_field_x(double x) {
  double s = gradient_s_of_x(wrap01(x));
  return 0.5 * kPi * gradient_phi_prime(s);
}

Point gradient_time_one_map(double x0, int substeps) {
  double x = x0;
  const double h = 1.0 / substeps;
  for (int i = 0; i < substeps; ++i) {
    double k1 = gradient_field_x(x);
    double k2 = gradient_field_x(x + 0.5 * h * k1);
    double k3 = gradient_field_x(x + 0.5 * h * k2);
    double k4 = gradient_field_x(x + h * k3);
    double dx = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(dx) || std::abs(dx) > 0.25)
      throw std::runtime_error("gradient: integration step instability");
    x += dx;
  }
  return Point(wrap01(x), 0.0);
}

}  // namespace

double gradient_phi_prime(double s) {
  if (s == 0.0) return 0.0;
  double inv = 1.0 / s;
  return 4.0 * s * s * s * std::sin(inv) - s * s * std::cos(inv);
}

double gradient_s_of_x(double x) { return (2.0 * x - 1.0) / kPi; }
double gradient_x_of_s(double s) { return wrap01(0.5 * (s * kPi + 1.0)); }

// ---------------------------------------------------------------------------

std::string SystemSpec::name() const {
  struct V {
    std::string operator()(const LinearExpanding& f) const {
      return "linear_expanding_d" + std::to_string(f.degree);
    }
    std::string operator()(const PerturbedExpanding& f) const {
      return "perturbed_expanding_d" + std::to_string(f.degree);
    }
    std::string operator()(const ProductHalving&) const { return "product_halving"; }
    std::string operator()(const BowenSaddles& f) const {
      double lu = std::min(f.unstable_a, f.unstable_b);
      return (f.mu >= 0.2 * lu) ? "bowen_oscillating" : "bowen_physical";
    }
    std::string operator()(const GradientTimeOne&) const { return "gradient_time_one"; }
    std::string operator()(const QuadraticFeigenbaum&) const { return "quadratic_feigenbaum"; }
  };
  return std::visit(V{}, family);
}

bool SystemSpec::derivative_available() const {
  return std::holds_alternative<LinearExpanding>(family) ||
         std::holds_alternative<PerturbedExpanding>(family);
}

bool SystemSpec::iterable() const {
  return !std::holds_alternative<QuadraticFeigenbaum>(family);
}

SystemSpec make_linear_expanding(int degree) {
  if (degree < 2) throw std::invalid_argument("linear expanding map needs degree >= 2");
  return {circle_space(), LinearExpanding{degree}};
}

SystemSpec make_perturbed_expanding(int degree, double epsilon) {
  if (degree < 2) throw std::invalid_argument("perturbed expanding map needs degree >= 2");
  if (!(epsilon >= 0.0 && epsilon < degree - 1.0))
    throw std::invalid_argument("perturbed expanding map needs 0 <= eps < d-1 to keep f' > 1");
  return {circle_space(), PerturbedExpanding{degree, epsilon}};
}

SystemSpec make_product_halving() { return {square_space(), ProductHalving{}}; }

SystemSpec make_bowen(const BowenSaddles& params) {
  if (!(params.unstable_a > 0 && params.unstable_b > 0 && params.stable_a < 0 &&
        params.stable_b < 0))
    throw std::invalid_argument(
        "bowen: saddle-connection geometry check failed, need unstable > 0 > stable "
        "at both saddles");
  if (!(params.mu > 0 && params.c0 > 0))
    throw std::invalid_argument("bowen: mu and c0 must be positive");
  if (!(params.time_scale > 0 && params.substeps >= 1))
    throw std::invalid_argument("bowen: time_scale and substeps must be positive");
  if (!(params.chart > 1.0))
    throw std::invalid_argument("bowen: chart box must contain the unit disk");
  return {square_space(), params};
}

SystemSpec make_gradient_time_one(int substeps) {
  if (substeps < 100) throw std::invalid_argument("gradient: substeps must be >= 100");
  return {circle_space(), GradientTimeOne{substeps}};
}

SystemSpec make_feigenbaum(int generation) {
  if (generation < 1 || generation > 20)
    throw std::invalid_argument("feigenbaum: generation outside [1,20]");
  return {interval_space(), QuadraticFeigenbaum{generation}};
}

SystemSpec build_bowen(const std::string& target, double lambda) {
  BowenSaddles p;
  if (target == "oscillating") {
    // Passage times stretch by 1 + mu per saddle (unstable rates are 1), so
    // each sojourn occupies a fixed large fraction of the elapsed time and
    // the averages swing along the segment [delta_A, delta_B]. time_scale
    // places the swing window across n ~ 1e4..2e5 map steps before the
    // arc distance reaches coordinate resolution.
    p.unstable_a = p.unstable_b = 1.0;
    p.stable_a = p.stable_b = -1.0;
    p.mu = 0.4;
    p.time_scale = 1.5e-4;
  } else if (target == "physical") {
    // mu << unstable rates: passage times grow so slowly that averages
    // settle at the combination weighting each saddle by its inverse
    // unstable rate, i.e. weight lambda on delta_A.
    if (!(lambda > 0.0 && lambda < 1.0))
      throw std::invalid_argument("bowen physical: lambda must lie in (0,1)");
    p.unstable_a = 1.0;
    p.unstable_b = lambda / (1.0 - lambda);
    p.stable_a = p.stable_b = -1.0;
    p.mu = 0.03;
    p.time_scale = 3.0e-3;
  } else {
    throw std::invalid_argument("build_bowen: target must be 'oscillating' or 'physical'");
  }
  return make_bowen(p);
}

SystemSpec build_bowen_from_eigenvalues(double unstable_a, double stable_a,
                                        double unstable_b, double stable_b,
                                        double mu, double time_scale, int substeps) {
  BowenSaddles p;
  p.unstable_a = unstable_a;
  p.stable_a = stable_a;
  p.unstable_b = unstable_b;
  p.stable_b = stable_b;
  p.mu = mu;
  p.time_scale = time_scale;
  p.substeps = substeps;
  return make_bowen(p);
}

BowenGeometry bowen_geometry(const SystemSpec& sys) {
  const auto* p = std::get_if<BowenSaddles>(&sys.family);
  if (!p) throw std::invalid_argument("bowen_geometry: not a Bowen system");
  BowenModel m{*p};
  BowenGeometry g;
  g.saddle_a = m.to_square(Point(-1.0, 0.0));
  g.saddle_b = m.to_square(Point(1.0, 0.0));
  g.unstable_a = p->time_scale * p->unstable_a;
  g.stable_a = p->time_scale * p->stable_a;
  g.unstable_b = p->time_scale * p->unstable_b;
  g.stable_b = p->time_scale * p->stable_b;
  g.radial_rate = -p->time_scale * p->mu;
  return g;
}

// ---------------------------------------------------------------------------

Point apply_map(const SystemSpec& sys, const Point& p) {
  struct V {
    const SystemSpec& sys;
    const Point& p;
    Point operator()(const LinearExpanding& f) const {
      return Point(wrap01(double(f.degree) * p.x()), 0.0);
    }
    Point operator()(const PerturbedExpanding& f) const {
      double v = double(f.degree) * p.x() + f.epsilon * std::sin(kTwoPi * p.x()) / kTwoPi;
      return Point(wrap01(v), 0.0);
    }
    Point operator()(const ProductHalving&) const { return Point(0.5 * p.x(), p.y()); }
    Point operator()(const BowenSaddles& f) const { return BowenModel{f}.time_one(p); }
    Point operator()(const GradientTimeOne& f) const {
      return gradient_time_one_map(p.x(), f.substeps);
    }
    Point operator()(const QuadraticFeigenbaum&) const {
      throw std::runtime_error("quadratic_feigenbaum is not iterable; use its reference measure");
    }
  };
  return std::visit(V{sys, p}, sys.family);
}

double log_derivative(const SystemSpec& sys, double x) {
  if (const auto* f = std::get_if<LinearExpanding>(&sys.family))
    return std::log(double(f->degree));
  if (const auto* f = std::get_if<PerturbedExpanding>(&sys.family))
    return std::log(double(f->degree) + f->epsilon * std::cos(kTwoPi * x));
  throw std::runtime_error("log_derivative: unsupported operation for " + sys.name());
}

Orbit iterate(const SystemSpec& sys, const Point& x0, long n) {
  if (n < 1) throw std::invalid_argument("iterate: n must be >= 1");
  Point p = canonicalize(sys.space, x0);
  if (!contains(sys.space, p)) throw std::invalid_argument("iterate: x0 outside phase space");
  Orbit orb;
  orb.initial = p;
  orb.points.reserve(static_cast<size_t>(n));
  for (long j = 0; j < n; ++j) {
    orb.points.push_back(p);
    if (j + 1 < n) p = apply_map(sys, p);
  }
  return orb;
}

OrbitStream::OrbitStream(const SystemSpec& sys, std::uint64_t seed)
    : sys_(sys), rng_(seed) {
  if (!sys.iterable()) throw std::runtime_error("orbit stream: system not iterable");
  if (const auto* f = std::get_if<BowenSaddles>(&sys.family)) {
    bowen_mode_ = true;
    double a = rng_.next_double(), b = rng_.next_double();
    x_ = Point(a, b);
    bowen_state_ = BowenModel{*f}.to_model(x_);
    return;
  }
  if (const auto* f = std::get_if<LinearExpanding>(&sys.family)) {
    digit_mode_ = true;
    digit_base_ = f->degree;
    // Largest window with d^W <= 2^63 so the shift-and-append update fits.
    std::uint64_t limit = 1ULL << 63, m = 1;
    int w = 0;
    while (m <= limit / std::uint64_t(digit_base_)) {
      m *= std::uint64_t(digit_base_);
      ++w;
    }
    digit_window_ = w;
    digit_modulus_ = m / std::uint64_t(digit_base_);
    digit_scale_ = 1.0 / double(m);
    digit_state_ = 0;
    for (int i = 0; i < w; ++i)
      digit_state_ = digit_state_ * std::uint64_t(digit_base_) +
                     rng_.next_below(std::uint32_t(digit_base_));
    x_ = Point(double(digit_state_) * digit_scale_, 0.0);
    return;
  }
  double a = rng_.next_double();
  double b = (sys.space.dimension() == 2) ? rng_.next_double() : 0.0;
  x_ = canonicalize(sys.space, Point(a, b));
}

void OrbitStream::advance() {
  if (bowen_mode_) {
    BowenModel m{std::get<BowenSaddles>(sys_.family)};
    bowen_state_ = m.advance_model(bowen_state_);
    x_ = m.to_square(bowen_state_);
    return;
  }
  if (digit_mode_) {
    digit_state_ = (digit_state_ % digit_modulus_) * std::uint64_t(digit_base_) +
                   rng_.next_below(std::uint32_t(digit_base_));
    x_.x() = double(digit_state_) * digit_scale_;
    return;
  }
  x_ = apply_map(sys_, x_);
}

// ---------------------------------------------------------------------------

ProbMeasure pushforward(const ProbMeasure& mu, const SystemSpec& sys) {
  if (mu.space() != sys.space)
    throw std::invalid_argument("pushforward: measure/system space mismatch");
  if (mu.repr() == MeasureRepr::Atoms) {
    Eigen::Matrix2Xd pts(2, mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      pts.col(i) = apply_map(sys, mu.atom_points().col(i));
    return ProbMeasure::atoms(mu.space(), std::move(pts), mu.weights());
  }
  const HistogramGrid& grid = mu.grid();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.bin_count());
  const double h = 1.0 / grid.resolution;
  if (mu.space().dimension() == 1) {
    constexpr int S = 16;  // power of two: w/S splits are exact
    for (Eigen::Index b = 0; b < grid.bin_count(); ++b) {
      double w = mu.weights()[b];
      if (w == 0.0) continue;
      double piece = w / S;
      for (int j = 0; j < S; ++j) {
        Point src((double(b) + (j + 0.5) / S) * h, 0.0);
        out[grid.bin_of(apply_map(sys, src))] += piece;
      }
    }
  } else {
    constexpr int S = 8;
    for (Eigen::Index b = 0; b < grid.bin_count(); ++b) {
      double w = mu.weights()[b];
      if (w == 0.0) continue;
      double piece = w / (S * S);
      Eigen::Index iy = b / grid.resolution, ix = b % grid.resolution;
      for (int jy = 0; jy < S; ++jy)
        for (int jx = 0; jx < S; ++jx) {
          Point src((double(ix) + (jx + 0.5) / S) * h, (double(iy) + (jy + 0.5) / S) * h);
          out[grid.bin_of(apply_map(sys, src))] += piece;
        }
    }
  }
  return ProbMeasure::histogram(grid, std::move(out));
}

int winding_degree(const SystemSpec& sys, int grid) {
  if (sys.space.kind != SpaceKind::Circle)
    throw std::invalid_argument("winding_degree: circle maps only");
  double total = 0.0, prev = apply_map(sys, Point(0.0, 0.0)).x();
  for (int i = 1; i <= grid; ++i) {
    double x = double(i) / grid;
    double fx = apply_map(sys, Point(wrap01(x), 0.0)).x();
    double d = fx - prev;
    d -= std::round(d);  // increments along a fine grid are << 1/2
    total += d;
    prev = fx;
  }
  return static_cast<int>(std::lround(total));
}

double min_derivative_on_grid(const SystemSpec& sys, int grid) {
  if (!sys.derivative_available())
    throw std::runtime_error("min_derivative_on_grid: derivative unavailable for " + sys.name());
  double mn = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i)
    mn = std::min(mn, std::exp(log_derivative(sys, double(i) / grid)));
  return mn;
}

// ---------------------------------------------------------------------------

std::vector<double> gradient_sinks(double s_floor) {
  if (!(s_floor > 0 && s_floor < 1.0 / kPi))
    throw std::invalid_argument("gradient_sinks: s_floor outside (0, 1/pi)");
  std::vector<double> sinks;
  // Roots of phi' cluster at s = 0; scan uniformly in u = 1/s where they are
  // ~pi-spaced, on both signs of s, then bisect. A sink is a descending
  // crossing of phi' in s (local maximum of phi: the flow is gradient ascent).
  auto scan = [&](double sign) {
    const double u_min = kPi, u_max = 1.0 / s_floor;
    const double du = 0.01;
    double u_prev = u_min, f_prev = gradient_phi_prime(sign / u_prev);
    for (double u = u_min + du; u <= u_max; u += du) {
      double f = gradient_phi_prime(sign / u);
      if ((f_prev > 0.0) != (f > 0.0) && f_prev != 0.0 && f != 0.0) {
        double s_a = sign / u_prev, s_b = sign / u;
        if (s_a > s_b) std::swap(s_a, s_b);
        double fa = gradient_phi_prime(s_a);
        for (int it = 0; it < 200; ++it) {
          double s_m = 0.5 * (s_a + s_b);
          double fm = gradient_phi_prime(s_m);
          if ((fa > 0) == (fm > 0)) { s_a = s_m; fa = fm; } else { s_b = s_m; }
          if (s_b - s_a < 1e-15) break;
        }
        double s_root = 0.5 * (s_a + s_b);
        double eps = std::max(1e-12, 1e-4 * s_root * s_root);
        if (gradient_phi_prime(s_root - eps) > 0 && gradient_phi_prime(s_root + eps) < 0)
          sinks.push_back(gradient_x_of_s(s_root));
      }
      f_prev = f;
      u_prev = u;
    }
  };
  scan(1.0);
  scan(-1.0);
  std::sort(sinks.begin(), sinks.end());
  return sinks;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> feigenbaum_intervals(int generation) {
  if (generation < 1 || generation > 20)
    throw std::invalid_argument("feigenbaum_intervals: generation outside [1,20]");
  // Adding-machine nesting: the children of K_{i,n} are K_{i,n+1} (left
  // third) and K_{i+2^n,n+1} (right third).
  std::vector<std::pair<double, double>> out;
  const long count = 1L << generation;
  out.reserve(static_cast<size_t>(count));
  for (long i = 0; i < count; ++i) {
    double lo = 0.0, hi = 1.0;
    for (int level = 0; level < generation; ++level) {
      double third = (hi - lo) / 3.0;
      if ((i >> level) & 1L) lo = hi - third;
      else hi = lo + third;
    }
    out.emplace_back(lo, hi);
  }
  return out;
}

ProbMeasure feigenbaum_reference_measure(int generation) {
  auto intervals = feigenbaum_intervals(generation);
  const Eigen::Index n = static_cast<Eigen::Index>(intervals.size());
  Eigen::Matrix2Xd pts = Eigen::Matrix2Xd::Zero(2, n);
  for (Eigen::Index i = 0; i < n; ++i)
    pts(0, i) = 0.5 * (intervals[size_t(i)].first + intervals[size_t(i)].second);
  return ProbMeasure::atoms(interval_space(), std::move(pts),
                            Eigen::VectorXd::Constant(n, 1.0 / double(n)));
}

}  // namespace ergo
