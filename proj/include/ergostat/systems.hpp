#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ergostat/measure.hpp"
#include "ergostat/phase_space.hpp"
#include "ergostat/rng.hpp"

namespace ergo {

// ---------------------------------------------------------------------------
// System families
// ---------------------------------------------------------------------------

struct LinearExpanding {
  int degree = 2;  // g_d(x) = d x (mod 1)
};

struct PerturbedExpanding {
  int degree = 2;
  double epsilon = 0.3;  // f(x) = d x + eps sin(2 pi x) / (2 pi), f' = d + eps cos(2 pi x)
};

struct ProductHalving {};  // (x, y) -> (x/2, y) on the square

// Time-one map of a piecewise-smooth planar field on the unit disk (in a
// [-chart, chart]^2 model box mapped onto the unit square): two saddles
// A = (-1, 0), B = (1, 0) sit on the boundary circle, which consists of
// their saddle connections (W^u(A) = W^s(B) is the upper semicircle and
// W^u(B) = W^s(A) the lower one); the origin is a source. In polar form
//
//   r' = mu r (1 - r)
//   th' = -( g(th) + c0 |1 - r| ),   g = |sin th| (p + q cos th)
//
// with (p, q) chosen per semicircle so that the four angular saddle rates
// are exactly the given eigenvalues; the radial rate at the circle is -mu.
// Every interior orbit spirals out to the circle and circulates clockwise,
// slowing near the saddles with passage times ~ log(1/distance)/rate.
// Passages stretch by the factor 1 + mu/unstable per saddle: mu comparable
// to the unstable rates makes time averages oscillate along the segment
// between delta_A and delta_B; mu much smaller makes them settle at the
// combination weighting each saddle by its inverse unstable rate. The only
// field zeros are A, B and the origin, for every parameter choice.
struct BowenSaddles {
  double unstable_a = 1.0;  // angular rates of the field at the saddles
  double stable_a = -1.0;
  double unstable_b = 1.0;
  double stable_b = -1.0;
  double mu = 0.4;    // radial attraction rate of the boundary circle
  double c0 = 1.0;    // interior angular drift, vanishing on the circle
  double time_scale = 1.5e-4;
  double chart = 1.4;   // model box half-width mapped onto the unit square
  int substeps = 4;
};

// Time-one map of x' = grad phi on the circle, phi(s) = s^4 sin(1/s) on
// [-1/pi, 1/pi] with identified extremes. Sinks and sources alternate and
// accumulate at s = 0.
struct GradientTimeOne {
  int substeps = 1000;
};

// Quadratic family at the period-doubling accumulation point. Not iterated;
// carries the combinatorial reference measure mu(K_{i,n}) = 2^{-n}.
struct QuadraticFeigenbaum {
  int generation = 8;
};

using SystemFamily = std::variant<LinearExpanding, PerturbedExpanding, ProductHalving,
                                  BowenSaddles, GradientTimeOne, QuadraticFeigenbaum>;

struct SystemSpec {
  PhaseSpace space;
  SystemFamily family;

  std::string name() const;
  bool derivative_available() const;
  bool iterable() const;
};

SystemSpec make_linear_expanding(int degree);
SystemSpec make_perturbed_expanding(int degree, double epsilon);
SystemSpec make_product_halving();
SystemSpec make_bowen(const BowenSaddles& params);
SystemSpec make_gradient_time_one(int substeps);
SystemSpec make_feigenbaum(int generation);

// "oscillating" or "physical"; the physical variant targets the convex
// combination lambda * delta_A + (1 - lambda) * delta_B.
SystemSpec build_bowen(const std::string& target, double lambda = 0.5);

// Constructs the Bowen system from the four angular saddle eigenvalues of
// the field, (unstable_A, stable_A, unstable_B, stable_B). Any quadruple
// with unstable > 0 > stable passes the geometry check.
SystemSpec build_bowen_from_eigenvalues(double unstable_a, double stable_a,
                                        double unstable_b, double stable_b,
                                        double mu = 1.5, double time_scale = 1.5e-4,
                                        int substeps = 4);

struct BowenGeometry {
  Point saddle_a;  // phase-space (unit square) coordinates
  Point saddle_b;
  double unstable_a, stable_a, unstable_b, stable_b;  // time-one angular rates
  double radial_rate;                                 // time-one radial rate
};
BowenGeometry bowen_geometry(const SystemSpec& sys);

// ---------------------------------------------------------------------------
// Orbits
// ---------------------------------------------------------------------------

// One application of the time-one map. Throws on non-iterable systems and
// on integration escape (never clamps).
Point apply_map(const SystemSpec& sys, const Point& p);

// log f'(x) for circle expanding maps; unsupported-operation otherwise.
double log_derivative(const SystemSpec& sys, double x);

struct Orbit {
  Point initial;
  std::vector<Point> points;  // points[j] = f^j(initial), j = 0..n-1
};

Orbit iterate(const SystemSpec& sys, const Point& x0, long n);

// Streaming orbit of a Lebesgue-typical initial point drawn from `seed`.
// For linear expanding maps the orbit is generated from an i.i.d. digit
// stream (a sliding window in base d), which is the exact distribution of
// a Lebesgue-random orbit and avoids the finite-precision collapse of
// repeated digit shifts. All other families iterate in double precision
// from a random initial point.
class OrbitStream {
 public:
  OrbitStream(const SystemSpec& sys, std::uint64_t seed);

  const Point& current() const { return x_; }
  void advance();
  const SystemSpec& system() const { return sys_; }

 private:
  SystemSpec sys_;
  Point x_;
  bool bowen_mode_ = false;    // state kept in model coordinates so slow
  Point bowen_state_;          // near-saddle passages are not quantized away
  bool digit_mode_ = false;
  int digit_base_ = 2;
  int digit_window_ = 63;
  std::uint64_t digit_state_ = 0;   // base-d window as an integer
  std::uint64_t digit_modulus_ = 1; // d^(W-1)
  double digit_scale_ = 0.0;        // 1 / d^W
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Measures under the dynamics
// ---------------------------------------------------------------------------

// f_* mu. Atom measures map pointwise; histograms redistribute each bin
// through a 2^k subsample of the bin (mass stays exact: power-of-two splits).
ProbMeasure pushforward(const ProbMeasure& mu, const SystemSpec& sys);

// Winding number of a circle map computed by lifting along a fine grid.
int winding_degree(const SystemSpec& sys, int grid = 4096);

// min f' over a uniform grid (expanding verification).
double min_derivative_on_grid(const SystemSpec& sys, int grid = 10000);

// ---------------------------------------------------------------------------
// Gallery helpers
// ---------------------------------------------------------------------------

// phi'(s) for the gradient example, phi(s) = s^4 sin(1/s).
double gradient_phi_prime(double s);

// Sink locations (attracting fixed points of the time-one map) with
// |s| >= s_floor, found by sign changes of phi' on a fine grid refined by
// bisection. Returned in circle-chart coordinates x in [0,1).
std::vector<double> gradient_sinks(double s_floor = 1e-3);

// Circle-chart <-> gradient model coordinate s in [-1/pi, 1/pi).
double gradient_s_of_x(double x);
double gradient_x_of_s(double s);

// Reference measure of Example: atoms of mass 2^-n at the midpoints of the
// generation-n intervals K_{i,n} (adding-machine nesting, thirds embedding).
ProbMeasure feigenbaum_reference_measure(int generation);
std::vector<std::pair<double, double>> feigenbaum_intervals(int generation);

}  // namespace ergo
