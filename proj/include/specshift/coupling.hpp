#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "specshift/core.hpp"
#include "specshift/family.hpp"
#include "specshift/hermitian.hpp"
#include "specshift/interval.hpp"
#include "specshift/quadrature.hpp"
#include "specshift/shift.hpp"
#include "specshift/step_function.hpp"

namespace specshift {

struct Violation {
  int index;
  double gap;  // amount by which the asserted inequality failed
};

struct ScanReport {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<Violation> violations;
  double tolerance = 0.0;
};

namespace detail {

inline double additive_tolerance(const std::vector<double>& values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return 1e-8 * (1.0 + m);
}

// Flags pairs (i, k) whose midpoint is itself a grid point and where the
// value at the midpoint dips below the chord average.
inline void midpoint_concavity_violations(ScanReport& r) {
  const size_t n = r.grid.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = i + 2; k < n; ++k) {
      const double mid = 0.5 * (r.grid[i] + r.grid[k]);
      const auto it =
          std::lower_bound(r.grid.begin() + i, r.grid.begin() + k, mid);
      size_t j = static_cast<size_t>(it - r.grid.begin());
      if (j > i && std::abs(r.grid[j - 1] - mid) < std::abs(r.grid[j] - mid))
        --j;
      if (j <= i || j >= k) continue;
      if (std::abs(r.grid[j] - mid) > 1e-9 * (r.grid[k] - r.grid[i])) continue;
      const double chord = 0.5 * (r.values[i] + r.values[k]);
      const double gap = chord - r.values[j];
      if (gap > r.tolerance)
        r.violations.push_back({static_cast<int>(j), gap});
    }
  }
}

}  // namespace detail

// m(s) = tr(V'(s) E_{H(s)}((-inf, mu))) on a grid, no hypothesis checks.
// Negative controls call this directly.
inline std::vector<double> projected_trace_scan(const HermitianOperator& h0,
                                                const OperatorFamily& f,
                                                double mu,
                                                const std::vector<double>& grid) {
  if (h0.dim() != f.dim())
    throw DimensionError("projected_trace_scan: dimension mismatch");
  std::vector<double> out;
  out.reserve(grid.size());
  for (double s : grid) {
    const FamilyValue fv = f.eval(s);
    const HermitianOperator h = h0 + fv.v;
    const ComplexMatrix p =
        spectral_projection(h, RealInterval::less_than(mu));
    out.push_back(trace(ComplexMatrix(fv.first.matrix() * p)));
  }
  return out;
}

// Concave path: s -> tr(V'(s) E_{H(s)}((-inf, mu))) must be nonincreasing.
// Requires V'' <= 0 on the grid; increases beyond the additive tolerance are
// reported as violations.
inline ScanReport monotonicity_scan(const HermitianOperator& h0,
                                    const OperatorFamily& f, double mu,
                                    const std::vector<double>& grid) {
  if (grid.size() < 2)
    throw DomainError("monotonicity_scan: need at least two grid points");
  const ConcavityWitness w = check_concavity(f, grid);
  if (!w.concave)
    throw HypothesisError(
        "monotonicity_scan: V''(s) has top eigenvalue " +
        std::to_string(w.worst_eigenvalue) + " > 0 at s = " +
        std::to_string(w.worst_s));
  ScanReport r;
  r.grid = grid;
  r.values = projected_trace_scan(h0, f, mu, grid);
  r.tolerance = detail::additive_tolerance(r.values);
  for (size_t i = 0; i + 1 < r.values.size(); ++i) {
    const double rise = r.values[i + 1] - r.values[i];
    if (rise > r.tolerance)
      r.violations.push_back({static_cast<int>(i + 1), rise});
  }
  return r;
}

// Averaged projected trace over the coupling window, by adaptive Simpson.
// The integrand jumps when an eigenvalue of H(s) crosses the boundary of
// delta; the quadrature absorbs those via depth-limited bisection.
inline double spectral_average(const HermitianOperator& h0,
                               const OperatorFamily& f,
                               const RealInterval& delta, double s_lo,
                               double s_hi, double tol) {
  if (h0.dim() != f.dim())
    throw DimensionError("spectral_average: dimension mismatch");
  if (!(s_lo <= s_hi))
    throw DomainError("spectral_average: need s_lo <= s_hi");
  const auto integrand = [&](double s) {
    const FamilyValue fv = f.eval(s);
    const HermitianOperator h = h0 + fv.v;
    return trace(ComplexMatrix(fv.first.matrix() *
                               spectral_projection(h, delta)));
  };
  AdaptiveSimpsonOptions opt;
  opt.tol = tol;
  return adaptive_simpson(integrand, s_lo, s_hi, opt);
}

struct AveragingCheck {
  double lhs;  // integral over delta of xi at s_hi minus xi at s_lo
  double rhs;  // coupling integral of the projected trace
  double gap;
};

// Spectral averaging identity between the two coupling endpoints.
inline AveragingCheck averaging_identity_check(const HermitianOperator& h0,
                                               const OperatorFamily& f,
                                               const RealInterval& delta,
                                               double s_lo, double s_hi,
                                               double tol) {
  const StepFunction xi_hi = shift_function(h0, f.eval(s_hi).v).xi;
  const StepFunction xi_lo = shift_function(h0, f.eval(s_lo).v).xi;
  const double lhs = (xi_hi - xi_lo).integral_over(delta);
  const double rhs = spectral_average(h0, f, delta, s_lo, s_hi, tol);
  return AveragingCheck{lhs, rhs, std::abs(lhs - rhs)};
}

// zeta(mu, s_i) on the grid with midpoint-concavity screening.
inline ScanReport concavity_check(const HermitianOperator& h0,
                                  const OperatorFamily& f, double mu,
                                  const std::vector<double>& grid) {
  if (grid.size() < 3)
    throw DomainError("concavity_check: need at least three grid points");
  const ConcavityWitness w = check_concavity(f, grid);
  if (!w.concave)
    throw HypothesisError("concavity_check: V''(s) has top eigenvalue " +
                          std::to_string(w.worst_eigenvalue) + " > 0 at s = " +
                          std::to_string(w.worst_s));
  ScanReport r;
  r.grid = grid;
  r.values.reserve(grid.size());
  for (double s : grid)
    r.values.push_back(zeta(shift_function(h0, f.eval(s).v).xi, mu));
  r.tolerance = detail::additive_tolerance(r.values);
  detail::midpoint_concavity_violations(r);
  return r;
}

struct SubadditivityRecord {
  double s;
  double t;
  double joint;      // zeta(mu, s + t)
  double split_sum;  // zeta(mu, s) + zeta(mu, t)
  double gap;        // joint - split_sum; positive beyond tolerance violates
};

struct SubadditivityReport {
  std::vector<SubadditivityRecord> records;
  std::vector<Violation> violations;
  double tolerance = 0.0;
};

// zeta(mu, s + t) <= zeta(mu, s) + zeta(mu, t) for nonnegative couplings.
inline SubadditivityReport subadditivity_check(
    const HermitianOperator& h0, const OperatorFamily& f, double mu,
    const std::vector<std::pair<double, double>>& pairs) {
  const ConcavityWitness w =
      check_concavity(f, [&] {
        std::vector<double> pts;
        for (auto [s, t] : pairs) {
          pts.push_back(s);
          pts.push_back(t);
          pts.push_back(s + t);
        }
        return pts;
      }());
  if (!w.concave)
    throw HypothesisError("subadditivity_check: V''(s) has top eigenvalue " +
                          std::to_string(w.worst_eigenvalue) + " > 0 at s = " +
                          std::to_string(w.worst_s));
  SubadditivityReport rep;
  const auto zeta_at = [&](double s) {
    return zeta(shift_function(h0, f.eval(s).v).xi, mu);
  };
  std::vector<double> all_values;
  for (auto [s, t] : pairs) {
    if (s < 0.0 || t < 0.0)
      throw DomainError("subadditivity_check: pair with negative coupling");
    SubadditivityRecord rec;
    rec.s = s;
    rec.t = t;
    rec.joint = zeta_at(s + t);
    rec.split_sum = zeta_at(s) + zeta_at(t);
    rec.gap = rec.joint - rec.split_sum;
    all_values.push_back(rec.joint);
    all_values.push_back(rec.split_sum);
    rep.records.push_back(rec);
  }
  rep.tolerance = detail::additive_tolerance(all_values);
  for (size_t i = 0; i < rep.records.size(); ++i)
    if (rep.records[i].gap > rep.tolerance)
      rep.violations.push_back({static_cast<int>(i), rep.records[i].gap});
  return rep;
}

namespace detail {

inline void require_nonincreasing_samples(
    const std::function<double(double)>& f, double lo, double hi) {
  const int n = 64;
  double prev = f(lo);
  double scale = std::abs(prev);
  for (int i = 1; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double y = f(x);
    scale = std::max(scale, std::abs(y));
    if (y > prev + 1e-12 * (1.0 + scale))
      throw HypothesisError(
          "weight function increases between sampled points " +
          std::to_string(lo + (hi - lo) * (i - 1) / n) + " and " +
          std::to_string(x));
    prev = y;
  }
}

}  // namespace detail

// g(s) = integral of f against xi(., h0, h0 + V(s)) for a nonincreasing step
// weight; exact interval arithmetic, then midpoint-concavity screening.
inline ScanReport kostrykin_functional_check(const HermitianOperator& h0,
                                             const OperatorFamily& f,
                                             const StepFunction& weight,
                                             const std::vector<double>& grid) {
  const std::vector<double>& wv = weight.values();
  for (size_t i = 0; i + 1 < wv.size(); ++i)
    if (wv[i + 1] > wv[i] + 1e-12)
      throw HypothesisError(
          "kostrykin_functional_check: step weight increases at breakpoint " +
          std::to_string(weight.breakpoints()[i]));
  const ConcavityWitness cw = check_concavity(f, grid);
  if (!cw.concave)
    throw HypothesisError(
        "kostrykin_functional_check: V''(s) has top eigenvalue " +
        std::to_string(cw.worst_eigenvalue) + " > 0 at s = " +
        std::to_string(cw.worst_s));
  ScanReport r;
  r.grid = grid;
  for (double s : grid) {
    const StepFunction xi = shift_function(h0, f.eval(s).v).xi;
    const StepFunction product =
        xi.combine(weight, [](double x, double y) { return x * y; });
    r.values.push_back(product.integral());
  }
  r.tolerance = detail::additive_tolerance(r.values);
  detail::midpoint_concavity_violations(r);
  return r;
}

// Same functional with a smooth nonincreasing weight of bounded variation;
// the weight is integrated per piece of xi by adaptive Simpson.
inline ScanReport kostrykin_functional_check(
    const HermitianOperator& h0, const OperatorFamily& f,
    const std::function<double(double)>& weight,
    const std::vector<double>& grid, double tol = 1e-9) {
  const ConcavityWitness cw = check_concavity(f, grid);
  if (!cw.concave)
    throw HypothesisError(
        "kostrykin_functional_check: V''(s) has top eigenvalue " +
        std::to_string(cw.worst_eigenvalue) + " > 0 at s = " +
        std::to_string(cw.worst_s));
  ScanReport r;
  r.grid = grid;
  AdaptiveSimpsonOptions opt;
  opt.tol = tol;
  bool hypothesis_checked = false;
  for (double s : grid) {
    const StepFunction xi = shift_function(h0, f.eval(s).v).xi;
    const std::vector<double>& bp = xi.breakpoints();
    if (!hypothesis_checked && !bp.empty()) {
      detail::require_nonincreasing_samples(weight, bp.front() - 1.0,
                                            bp.back() + 1.0);
      hypothesis_checked = true;
    }
    double acc = 0.0;
    const std::vector<double>& vals = xi.values();
    for (size_t i = 1; i + 1 < vals.size(); ++i) {
      if (vals[i] == 0.0) continue;
      acc += vals[i] * adaptive_simpson(weight, bp[i - 1], bp[i], opt);
    }
    r.values.push_back(acc);
  }
  r.tolerance = detail::additive_tolerance(r.values);
  detail::midpoint_concavity_violations(r);
  return r;
}

}  // namespace specshift
