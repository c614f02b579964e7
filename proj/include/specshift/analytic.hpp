#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "specshift/contour.hpp"
#include "specshift/core.hpp"
#include "specshift/coupling.hpp"
#include "specshift/family.hpp"
#include "specshift/functional_calculus.hpp"
#include "specshift/hermitian.hpp"
#include "specshift/quadrature.hpp"
#include "specshift/shift.hpp"
#include "specshift/smooth_function.hpp"

namespace specshift {

namespace detail {

inline double product_trace(const HermitianOperator& a,
                            const HermitianOperator& b) {
  return trace(ComplexMatrix(a.matrix() * b.matrix()));
}

// tr(w f(h)) through the eigendecomposition of h only.
inline double weighted_function_trace(const HermitianOperator& h,
                                      const HermitianOperator& w,
                                      const SmoothFunction& f) {
  const SpectralDecomposition& d = h.spectrum();
  double acc = 0.0;
  for (int k = 0; k < d.dim(); ++k) {
    const Eigen::VectorXcd u = d.eigenvectors.col(k);
    const Complex wk = (u.adjoint() * w.matrix() * u)(0, 0);
    acc += f.value(d.eigenvalues(k)) * wk.real();
  }
  return acc;
}

}  // namespace detail

struct RegularizationReport {
  std::vector<double> eps_sequence;
  std::vector<double> values;    // tr(w phi_{mu,eps}(h)) along the schedule
  double projected_trace = 0.0;  // tr(w E_h((-inf, mu)))
  double gap = 0.0;              // distance from mu to the spectrum of h

  double final_error() const {
    return values.empty() ? 0.0
                          : std::abs(values.back() - projected_trace);
  }
};

// Smoothed counting traces tr(w phi_{mu,eps}(h)) along a schedule of
// widths, together with the sharp projected trace they approach.
inline RegularizationReport regularization_limit_check(
    const HermitianOperator& h, const HermitianOperator& w, double mu,
    const std::vector<double>& eps_sequence) {
  if (w.dim() != h.dim())
    throw DimensionError("regularization_limit_check: dimension mismatch");
  if (eps_sequence.empty())
    throw DomainError("regularization_limit_check: empty schedule");
  RegularizationReport r;
  r.eps_sequence = eps_sequence;
  r.gap = std::numeric_limits<double>::infinity();
  const RealVector& ev = h.spectrum().eigenvalues;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    r.gap = std::min(r.gap, std::abs(ev(i) - mu));
  if (r.gap < 1e-12)
    throw DomainError(
        "regularization_limit_check: mu within 1e-12 of an eigenvalue; the "
        "sharp projection is ambiguous at finite width");
  const ComplexMatrix proj =
      spectral_projection(h, RealInterval::less_than(mu));
  r.projected_trace = trace(ComplexMatrix(w.matrix() * proj));
  for (double eps : eps_sequence)
    r.values.push_back(
        detail::weighted_function_trace(h, w, smoothed_indicator(mu, eps)));
  return r;
}

namespace detail {

// (1 / 2 pi i) * clockwise loop of phi(z) tr[(d (h - z)^{-1})^2] dz, with the
// resolvents taken by LU solves so the route shares nothing with the
// eigendecomposition paths it is compared against.
inline double squared_resolvent_contour_term(const HermitianOperator& h,
                                             const ComplexMatrix& d,
                                             const SmoothFunction& phi,
                                             const Contour& c, int n_points) {
  const int n = h.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const Complex raw = contour_integral<Complex>(c, n_points, [&](Complex z) {
    ComplexMatrix shifted = h.matrix() - z * id;
    const ComplexMatrix resolvent = shifted.partialPivLu().solve(id);
    const ComplexMatrix dr = d * resolvent;
    return phi.analytic(z) * trace_complex(ComplexMatrix(dr * dr));
  });
  if (std::abs(raw.imag()) > 1e-8)
    throw QuadratureError(
        "squared resolvent contour term: imaginary residue " +
        std::to_string(raw.imag()));
  return raw.real();
}

inline void require_spectrum_inside(const HermitianOperator& h,
                                    const Contour& c, int n_points,
                                    const std::string& who) {
  const double clearance = c.min_clearance(n_points);
  const RealVector& ev = h.spectrum().eigenvalues;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const Complex z(ev(i), 0.0);
    if (!c.strictly_inside(z) || c.distance(z) < clearance)
      throw DomainError(who + ": eigenvalue " + std::to_string(ev(i)) +
                        " not strictly inside the contour with clearance");
  }
}

}  // namespace detail

struct DerivativeFormulaResult {
  double analytic;
  double finite_diff;
  double gap() const { return std::abs(analytic - finite_diff); }
};

// d/ds tr(V'(s) phi(H(s))) two ways: the closed form
//   tr(V''(s) phi(H(s))) - (1 / 2 pi i) oint phi(z) tr[V'(s) (H(s)-z)^{-1}]^2 dz
// against a central difference of the map itself with step 1e-5.
inline DerivativeFormulaResult derivative_formula_check(
    const HermitianOperator& h0, const OperatorFamily& f, double s,
    const SmoothFunction& phi, const Contour& c, int n_points) {
  const double h = 1e-5;
  const auto at = [&](double x) { return h0 + f.eval(x).v; };
  for (double x : {s - h, s, s + h})
    detail::require_spectrum_inside(
        at(x), c, n_points,
        "derivative_formula_check (differentiation neighborhood)");

  const FamilyValue fv = f.eval(s);
  const HermitianOperator hs = at(s);
  DerivativeFormulaResult out{0.0, 0.0};
  out.analytic =
      detail::product_trace(fv.second, apply_function(hs, phi.value_fn())) -
      detail::squared_resolvent_contour_term(hs, fv.first.matrix(), phi, c,
                                             n_points);

  const auto smoothed = [&](double x) {
    return detail::product_trace(f.eval(x).first,
                                 apply_function(at(x), phi.value_fn()));
  };
  out.finite_diff = (smoothed(s + h) - smoothed(s - h)) / (2.0 * h);
  return out;
}

struct DerivativeSignReport {
  std::vector<double> grid;
  std::vector<double> first_terms;    // tr(V''(s) phi(H(s))), expected <= 0
  std::vector<double> contour_terms;  // subtracted loop term, expected >= 0
  std::vector<double> derivatives;    // first - contour, expected <= 0
  std::vector<Violation> violations;  // grid points with derivative > tol
  double tolerance = 1e-8;
};

// Signed pieces of the derivative above across a coupling grid, for concave
// families and nonnegative nonincreasing weights.
inline DerivativeSignReport derivative_sign_scan(const HermitianOperator& h0,
                                                 const OperatorFamily& f,
                                                 const SmoothFunction& phi,
                                                 const Contour& c,
                                                 int n_points,
                                                 const std::vector<double>& s_grid) {
  if (s_grid.empty()) throw DomainError("derivative_sign_scan: empty grid");
  const ConcavityWitness cw = check_concavity(f, s_grid);
  if (!cw.concave)
    throw HypothesisError(
        "derivative_sign_scan: family not concave at s = " +
        std::to_string(cw.worst_s) + " (top curvature eigenvalue " +
        std::to_string(cw.worst_eigenvalue) + ")");
  const int samples = 101;
  for (int i = 0; i < samples; ++i) {
    const double x = c.a + (c.b - c.a) * i / (samples - 1);
    if (phi.value(x) < -1e-12)
      throw HypothesisError("derivative_sign_scan: weight negative at " +
                            std::to_string(x));
    if (phi.derivative(x) > 1e-12)
      throw HypothesisError("derivative_sign_scan: weight increasing at " +
                            std::to_string(x));
  }

  DerivativeSignReport r;
  r.grid = s_grid;
  for (size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    const FamilyValue fv = f.eval(s);
    const HermitianOperator hs = h0 + fv.v;
    detail::require_spectrum_inside(hs, c, n_points, "derivative_sign_scan");
    const double first =
        detail::product_trace(fv.second, apply_function(hs, phi.value_fn()));
    const double loop = detail::squared_resolvent_contour_term(
        hs, fv.first.matrix(), phi, c, n_points);
    r.first_terms.push_back(first);
    r.contour_terms.push_back(loop);
    r.derivatives.push_back(first - loop);
    if (first - loop > r.tolerance)
      r.violations.push_back({static_cast<int>(i), first - loop});
  }
  return r;
}

struct TruncationTable {
  std::vector<double> n_values;  // spectral window half-widths
  std::vector<double> s_values;
  std::vector<std::vector<double>> values;  // values[n index][s index]
  double max_column_gap = 0.0;  // |last row - previous row| over columns
  std::vector<Violation> row_violations;  // upward moves along s in any row
  double row_tolerance = 1e-8;

  bool columns_converged(double tol) const { return max_column_gap <= tol; }
};

// Smoothed counting traces for the compressed operators
// H_n(s) = P_n H0 P_n + V(s), P_n = E_{H0}((-n, n)), swept over the window
// half-widths and the coupling grid.
inline TruncationTable truncation_experiment(const HermitianOperator& h0,
                                             const OperatorFamily& f,
                                             const std::vector<double>& s_grid,
                                             const std::vector<double>& n_sequence,
                                             double mu, double eps) {
  if (s_grid.empty() || n_sequence.empty())
    throw DomainError("truncation_experiment: empty grid or window sequence");
  const SmoothFunction phi = smoothed_indicator(mu, eps);
  TruncationTable t;
  t.n_values = n_sequence;
  t.s_values = s_grid;
  for (double n : n_sequence) {
    const ComplexMatrix p = spectral_projection(h0, RealInterval::open(-n, n));
    const ComplexMatrix compressed = p * h0.matrix() * p;
    std::vector<double> row;
    for (double s : s_grid) {
      const FamilyValue fv = f.eval(s);
      const HermitianOperator hn(hermitize(compressed + fv.v.matrix()));
      row.push_back(detail::weighted_function_trace(hn, fv.first, phi));
    }
    t.values.push_back(std::move(row));
  }
  const size_t rows = t.values.size();
  if (rows >= 2)
    for (size_t j = 0; j < s_grid.size(); ++j)
      t.max_column_gap = std::max(
          t.max_column_gap,
          std::abs(t.values[rows - 1][j] - t.values[rows - 2][j]));
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 1; j < s_grid.size(); ++j) {
      const double rise = t.values[i][j] - t.values[i][j - 1];
      if (rise > t.row_tolerance)
        t.row_violations.push_back(
            {static_cast<int>(i * s_grid.size() + j), rise});
    }
  return t;
}

struct SemiboundedReport {
  std::vector<double> grid;
  std::vector<double> direct;  // tr(phi(H(s)) - phi(H0))
  std::vector<double> ibp;     // second route through the shift function
  double max_identity_gap = 0.0;
  std::vector<Violation> concavity_violations;  // on the direct sequence
  double identity_tolerance = 1e-7;
  double concavity_tolerance = 1e-8;
};

// Two routes to tr(phi(H(s)) - phi(H0)): eigendecomposition directly, and
// integration by parts against the integrated shift function,
//   ibp = -int_Lambda phi''(lambda) zeta(lambda, s) dlambda
//         + tr V(s) * phi'(Lambda_hi),
// where the boundary term is the exact value of the integral over the
// constant tail of zeta beyond the spectral hull (phi' vanishes at +inf).
inline SemiboundedReport semibounded_concavity_check(
    const HermitianOperator& h0, const OperatorFamily& f,
    const SmoothFunction& phi, const std::vector<double>& s_grid) {
  if (s_grid.empty())
    throw DomainError("semibounded_concavity_check: empty grid");
  if (!phi.has_second_derivative())
    throw DomainError(
        "semibounded_concavity_check: weight needs a second derivative");
  const ConcavityWitness cw = check_concavity(f, s_grid);
  if (!cw.concave)
    throw HypothesisError(
        "semibounded_concavity_check: family not concave at s = " +
        std::to_string(cw.worst_s));

  double lo = h0.min_eigenvalue();
  double hi = h0.max_eigenvalue();
  std::vector<HermitianOperator> hs;
  hs.reserve(s_grid.size());
  for (double s : s_grid) {
    hs.push_back(h0 + f.eval(s).v);
    lo = std::min(lo, hs.back().min_eigenvalue());
    hi = std::max(hi, hs.back().max_eigenvalue());
  }
  const double pad = 0.01 * (hi - lo) + 1e-6;
  const double lambda_lo = lo - pad;
  const double lambda_hi = hi + pad;

  const int samples = 101;
  for (int i = 0; i < samples; ++i) {
    const double x = lambda_lo + (lambda_hi - lambda_lo) * i / (samples - 1);
    if (phi.second_derivative(x) > 1e-12)
      throw HypothesisError(
          "semibounded_concavity_check: weight convex at lambda = " +
          std::to_string(x));
  }
  if (std::abs(phi.derivative(lambda_hi + 40.0 * (1.0 + lambda_hi - lambda_lo))) >
      1e-8)
    throw HypothesisError(
        "semibounded_concavity_check: weight slope does not vanish at the "
        "right end");

  SemiboundedReport r;
  r.grid = s_grid;
  const HermitianOperator phi_h0 = apply_function(h0, phi.value_fn());
  for (size_t i = 0; i < s_grid.size(); ++i) {
    const FamilyValue fv = f.eval(s_grid[i]);
    const HermitianOperator phi_hs = apply_function(hs[i], phi.value_fn());
    const double direct = trace(phi_hs) - trace(phi_h0);

    const StepFunction xi = shift_function(h0, fv.v).xi;
    std::vector<double> knots;
    knots.push_back(lambda_lo);
    for (double b : xi.breakpoints())
      if (b > lambda_lo && b < lambda_hi) knots.push_back(b);
    knots.push_back(lambda_hi);

    double ibp = 0.0;
    AdaptiveSimpsonOptions opt;
    opt.tol = 1e-9;
    for (size_t k = 0; k + 1 < knots.size(); ++k) {
      const double u = knots[k];
      const double w = knots[k + 1];
      const double xi_piece = xi(0.5 * (u + w));
      if (xi_piece == 0.0 && zeta(xi, u) == 0.0 && zeta(xi, w) == 0.0)
        continue;
      const double zeta_u = zeta(xi, u);
      ibp -= adaptive_simpson(
          [&](double lam) {
            return phi.second_derivative(lam) *
                   (zeta_u + xi_piece * (lam - u));
          },
          u, w, opt);
    }
    ibp += trace(fv.v) * phi.derivative(lambda_hi);

    r.direct.push_back(direct);
    r.ibp.push_back(ibp);
    r.max_identity_gap = std::max(r.max_identity_gap, std::abs(direct - ibp));
  }
  ScanReport direct_scan{r.grid, r.direct, {}, r.concavity_tolerance};
  detail::midpoint_concavity_violations(direct_scan);
  r.concavity_violations = std::move(direct_scan.violations);
  return r;
}

struct HeatTraceReport {
  double t;
  ScanReport scan;  // values h_t(s); violations are convexity failures
};

// h_t(s) = tr(exp(-t H(s)) - exp(-t H0)); convex in s for concave families.
inline std::vector<HeatTraceReport> heat_trace_convexity(
    const HermitianOperator& h0, const OperatorFamily& f,
    const std::vector<double>& t_list, const std::vector<double>& s_grid) {
  if (t_list.empty() || s_grid.empty())
    throw DomainError("heat_trace_convexity: empty schedule or grid");
  for (double t : t_list)
    if (!(t > 0.0))
      throw DomainError("heat_trace_convexity: need t > 0, got " +
                        std::to_string(t));
  const auto trace_exp = [](const HermitianOperator& h, double t) {
    const RealVector& ev = h.spectrum().eigenvalues;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) acc += std::exp(-t * ev(i));
    return acc;
  };
  std::vector<HeatTraceReport> out;
  for (double t : t_list) {
    const double base = trace_exp(h0, t);
    ScanReport scan;
    scan.grid = s_grid;
    for (double s : s_grid)
      scan.values.push_back(trace_exp(h0 + f.eval(s).v, t) - base);
    scan.tolerance = detail::additive_tolerance(scan.values);
    ScanReport negated = scan;
    for (double& v : negated.values) v = -v;
    detail::midpoint_concavity_violations(negated);
    scan.violations = std::move(negated.violations);
    out.push_back({t, std::move(scan)});
  }
  return out;
}

}  // namespace specshift
