#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "specshift/core.hpp"
#include "specshift/hermitian.hpp"
#include "specshift/interval.hpp"
#include "specshift/step_function.hpp"

namespace specshift {

// N_A(x) = number of eigenvalues below x, as a step function whose
// breakpoints are the distinct eigenvalues. (At the breakpoints themselves
// the right-continuity convention applies; all downstream uses integrate,
// so the pointwise choice is immaterial.)
inline StepFunction counting_function(const HermitianOperator& a) {
  const RealVector& ev = a.spectrum().eigenvalues;
  std::vector<double> bp;
  std::vector<double> vals{0.0};
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (!bp.empty() && bp.back() == ev(k)) {
      vals.back() += 1.0;
    } else {
      bp.push_back(ev(k));
      vals.push_back(vals.back() + 1.0);
    }
  }
  return StepFunction(std::move(bp), std::move(vals));
}

struct ShiftResult {
  StepFunction xi;      // counting function of h0 minus that of h0 + v
  HermitianOperator h0;
  HermitianOperator h;
  double v_trace;
  double xi_l1;
};

// Spectral shift function of the pair (h0, h0 + v). The sign convention makes
// the integral of xi equal tr v. Coincident eigenvalues cancel exactly and
// the zero-valued gaps are pruned; both tails are zero by construction.
inline ShiftResult shift_function(const HermitianOperator& h0,
                                  const HermitianOperator& v) {
  if (h0.dim() != v.dim())
    throw DimensionError("shift_function: h0 is " + std::to_string(h0.dim()) +
                         "-dimensional but v is " + std::to_string(v.dim()));
  HermitianOperator h = h0 + v;
  StepFunction xi = counting_function(h0) - counting_function(h);
  ShiftResult r{xi, h0, h, trace(v), xi.l1_norm()};
  return r;
}

// Integral of xi over (-inf, mu); finite only when the left tail vanishes.
inline double zeta(const StepFunction& xi, double mu) {
  if (xi.left_tail() != 0.0)
    throw DomainError("zeta: step function has nonzero left tail");
  return xi.integral_over(RealInterval::less_than(mu));
}

struct KreinCheck {
  double lhs;  // tr(f(h) - f(h0)) via the eigendecompositions
  double rhs;  // integral of f' against xi, summed exactly per piece
  double gap;
};

// Trace formula: tr(f(h0+v) - f(h0)) equals the integral of f' xi. The right
// side needs only values of f at the breakpoints, so there is no quadrature
// and the two routes stay independent.
inline KreinCheck krein_check(const HermitianOperator& h0,
                              const HermitianOperator& v,
                              const std::function<double(double)>& f) {
  ShiftResult s = shift_function(h0, v);
  const double lhs =
      trace(apply_function(s.h, f)) - trace(apply_function(s.h0, f));
  const double rhs = s.xi.integrate_derivative_of(f);
  return KreinCheck{lhs, rhs, std::abs(lhs - rhs)};
}

struct SandwichCheck {
  double lower;  // tr(v E_{h0+v}((-inf, mu)))
  double mid;    // zeta(mu)
  double upper;  // tr(v E_{h0}((-inf, mu)))
};

// For the straight-line path from h0 to h0+v, the averaged projected trace
// zeta(mu) sits between the endpoint projected traces.
inline SandwichCheck sandwich_check(const HermitianOperator& h0,
                                    const HermitianOperator& v, double mu) {
  ShiftResult s = shift_function(h0, v);
  const RealInterval below = RealInterval::less_than(mu);
  const double lower = trace(ComplexMatrix(
      v.matrix() * spectral_projection(s.h, below)));
  const double upper = trace(ComplexMatrix(
      v.matrix() * spectral_projection(s.h0, below)));
  return SandwichCheck{lower, zeta(s.xi, mu), upper};
}

}  // namespace specshift
