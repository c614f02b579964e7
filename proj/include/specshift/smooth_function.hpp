#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specshift/core.hpp"

namespace specshift {

// Scalar test function bundled with its derivatives and, when available, an
// analytic continuation for contour work. Construction cross-checks the
// declared derivative against central differences; a mismatch is a caller
// bug, not a numerical subtlety, so it throws.
class SmoothFunction {
 public:
  using RealFn = std::function<double(double)>;
  using ComplexFn = std::function<Complex(Complex)>;

  struct CheckPlan {
    std::vector<double> points;
    std::vector<double> steps;  // matching central-difference half-widths
  };

  SmoothFunction(std::string descriptor, RealFn value, RealFn derivative,
                 std::optional<RealFn> second_derivative = std::nullopt,
                 std::optional<ComplexFn> analytic_extension = std::nullopt,
                 std::optional<CheckPlan> plan = std::nullopt)
      : descriptor_(std::move(descriptor)),
        value_(std::move(value)),
        derivative_(std::move(derivative)),
        second_(std::move(second_derivative)),
        analytic_(std::move(analytic_extension)) {
    CheckPlan p = plan ? std::move(*plan) : default_plan();
    if (p.points.size() != p.steps.size())
      throw DomainError("SmoothFunction: check plan sizes differ");
    for (size_t i = 0; i < p.points.size(); ++i) {
      const double x = p.points[i];
      const double h = p.steps[i];
      const double f_hi = value_(x + h);
      const double f_lo = value_(x - h);
      const double fd = (f_hi - f_lo) / (2.0 * h);
      const double d = derivative_(x);
      // Rounding floor of the central difference itself: x +- h rounds to
      // within ulp(x), and each value rounds relative to its magnitude.
      // Steep functions with steps far below |x| would otherwise trip the
      // check on noise alone.
      const double noise = std::numeric_limits<double>::epsilon() *
                           (std::abs(d) * std::max(1.0, std::abs(x)) +
                            std::abs(f_hi) + std::abs(f_lo)) /
                           h;
      if (std::abs(fd - d) > 1e-6 * (1.0 + std::abs(d)) + 4.0 * noise)
        throw DomainError("SmoothFunction '" + descriptor_ +
                          "': derivative disagrees with finite difference "
                          "at x = " +
                          std::to_string(x) + " (declared " +
                          std::to_string(d) + ", measured " +
                          std::to_string(fd) + ")");
    }
  }

  const std::string& descriptor() const { return descriptor_; }
  double operator()(double x) const { return value_(x); }
  double value(double x) const { return value_(x); }
  double derivative(double x) const { return derivative_(x); }

  bool has_second_derivative() const { return second_.has_value(); }
  double second_derivative(double x) const {
    if (!second_)
      throw DomainError("SmoothFunction '" + descriptor_ +
                        "': second derivative not provided");
    return (*second_)(x);
  }

  bool has_analytic_extension() const { return analytic_.has_value(); }
  Complex analytic(Complex z) const {
    if (!analytic_)
      throw DomainError("SmoothFunction '" + descriptor_ +
                        "': analytic extension not provided");
    return (*analytic_)(z);
  }

  RealFn value_fn() const { return value_; }
  RealFn derivative_fn() const { return derivative_; }

 private:
  static CheckPlan default_plan() {
    CheckPlan p;
    for (int i = 0; i < 10; ++i) {
      const double x = -2.7 + 0.6 * i;  // ten points across [-2.7, 2.7]
      p.points.push_back(x);
      p.steps.push_back(1e-5 * (1.0 + std::abs(x)));
    }
    return p;
  }

  std::string descriptor_;
  RealFn value_;
  RealFn derivative_;
  std::optional<RealFn> second_;
  std::optional<ComplexFn> analytic_;
};

namespace stock {

inline SmoothFunction identity() {
  return SmoothFunction(
      "identity", [](double x) { return x; }, [](double) { return 1.0; },
      [](double) { return 0.0; }, [](Complex z) { return z; });
}

inline SmoothFunction square() {
  return SmoothFunction(
      "square", [](double x) { return x * x; }, [](double x) { return 2.0 * x; },
      [](double) { return 2.0; }, [](Complex z) { return z * z; });
}

inline SmoothFunction cube() {
  return SmoothFunction(
      "cube", [](double x) { return x * x * x; },
      [](double x) { return 3.0 * x * x; }, [](double x) { return 6.0 * x; },
      [](Complex z) { return z * z * z; });
}

inline SmoothFunction constant(double c) {
  return SmoothFunction(
      "constant", [c](double) { return c; }, [](double) { return 0.0; },
      [](double) { return 0.0; }, [c](Complex) { return Complex(c, 0.0); });
}

// exp(-t x); nonnegative and nonincreasing for t > 0, entire continuation.
inline SmoothFunction exp_decay(double t) {
  return SmoothFunction(
      "exp_decay(" + std::to_string(t) + ")",
      [t](double x) { return std::exp(-t * x); },
      [t](double x) { return -t * std::exp(-t * x); },
      [t](double x) { return t * t * std::exp(-t * x); },
      [t](Complex z) { return std::exp(-t * z); });
}

inline SmoothFunction arctan() {
  return SmoothFunction(
      "arctan", [](double x) { return std::atan(x); },
      [](double x) { return 1.0 / (1.0 + x * x); },
      [](double x) {
        const double d = 1.0 + x * x;
        return -2.0 * x / (d * d);
      });
}

// 1 / (x - c); positive and decreasing to the right of the real pole c.
inline SmoothFunction reciprocal_shift(double c) {
  return SmoothFunction(
      "reciprocal_shift(" + std::to_string(c) + ")",
      [c](double x) { return 1.0 / (x - c); },
      [c](double x) { return -1.0 / ((x - c) * (x - c)); },
      [c](double x) { return 2.0 / ((x - c) * (x - c) * (x - c)); },
      [c](Complex z) { return 1.0 / (z - c); },
      SmoothFunction::CheckPlan{
          {c + 0.5, c + 1.0, c + 1.7, c + 2.4, c + 3.0, c + 4.0, c + 5.5,
           c + 7.0, c + 9.0, c + 12.0},
          std::vector<double>(10, 1e-6)});
}

// a - tanh(x - c): concave and nonincreasing on (-inf, c], derivative
// vanishing at +inf. Sign-indefinite when |a| < 1.
inline SmoothFunction shifted_tanh(double a, double c) {
  return SmoothFunction(
      "shifted_tanh(" + std::to_string(a) + "," + std::to_string(c) + ")",
      [a, c](double x) { return a - std::tanh(x - c); },
      [c](double x) {
        const double s = 1.0 / std::cosh(x - c);
        return -s * s;
      },
      [c](double x) {
        const double s = 1.0 / std::cosh(x - c);
        return 2.0 * s * s * std::tanh(x - c);
      },
      [a, c](Complex z) { return a - std::tanh(z - c); });
}

// Decreasing quadratic (r - x)^2 on x < r, nonnegative everywhere.
inline SmoothFunction falling_parabola(double r) {
  return SmoothFunction(
      "falling_parabola(" + std::to_string(r) + ")",
      [r](double x) { return (r - x) * (r - x); },
      [r](double x) { return -2.0 * (r - x); }, [](double) { return 2.0; },
      [r](Complex z) { return (r - z) * (r - z); });
}

}  // namespace stock

// Mollified indicator of (-inf, mu): value 1/2 - arctan((x - mu)/eps +
// 1/sqrt(eps)) / pi. Strictly decreasing from 1 to 0, converging to the
// sharp indicator as eps -> 0. The finite-difference sanity check runs at
// eps-scaled points; a fixed step would misread the steep transition.
inline SmoothFunction smoothed_indicator(double mu, double eps) {
  if (!(eps > 0.0))
    throw DomainError("smoothed_indicator: eps must be positive, got " +
                      std::to_string(eps));
  const double inv_sqrt_eps = 1.0 / std::sqrt(eps);
  const auto u_of = [mu, eps, inv_sqrt_eps](double x) {
    return (x - mu) / eps + inv_sqrt_eps;
  };
  SmoothFunction::CheckPlan plan;
  for (double u : {-12.0, -4.0, -1.5, -0.5, 0.0, 0.5, 1.5, 4.0, 12.0, 40.0}) {
    plan.points.push_back(mu + eps * (u - inv_sqrt_eps));
    plan.steps.push_back(eps / 1000.0);
  }
  const double pi = std::numbers::pi;
  return SmoothFunction(
      "smoothed_indicator(" + std::to_string(mu) + "," + std::to_string(eps) +
          ")",
      [u_of, pi](double x) { return 0.5 - std::atan(u_of(x)) / pi; },
      [u_of, eps, pi](double x) {
        const double u = u_of(x);
        return -1.0 / (pi * eps * (1.0 + u * u));
      },
      [u_of, eps, pi](double x) {
        const double u = u_of(x);
        const double d = 1.0 + u * u;
        return 2.0 * u / (pi * eps * eps * d * d);
      },
      std::nullopt, std::move(plan));
}

}  // namespace specshift
