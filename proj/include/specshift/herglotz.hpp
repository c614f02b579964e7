#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "specshift/contour.hpp"
#include "specshift/core.hpp"
#include "specshift/hermitian.hpp"
#include "specshift/smooth_function.hpp"

namespace specshift {

// P(z) = sum_j A_j / (p_j - z) with real poles and nonnegative weights; the
// imaginary part is nonnegative on the upper half plane.
struct RationalHerglotz {
  std::vector<double> poles;
  std::vector<double> weights;

  RationalHerglotz(std::vector<double> poles_, std::vector<double> weights_)
      : poles(std::move(poles_)), weights(std::move(weights_)) {
    if (poles.size() != weights.size())
      throw DimensionError("RationalHerglotz: pole/weight count mismatch");
    if (poles.empty())
      throw DomainError("RationalHerglotz: need at least one pole");
    for (double w : weights)
      if (!(w >= 0.0))
        throw DomainError("RationalHerglotz: negative weight " +
                          std::to_string(w));
    std::vector<double> sorted = poles;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i + 1 < sorted.size(); ++i)
      if (sorted[i] == sorted[i + 1])
        throw DomainError("RationalHerglotz: duplicate pole at " +
                          std::to_string(sorted[i]));
  }

  Complex eval(Complex z) const {
    Complex acc = 0.0;
    for (size_t j = 0; j < poles.size(); ++j) {
      const Complex d = poles[j] - z;
      if (std::abs(d) < 1e-12)
        throw DomainError("RationalHerglotz: evaluation within 1e-12 of pole " +
                          std::to_string(poles[j]));
      acc += weights[j] / d;
    }
    return acc;
  }
};

// M(z) = K (L - z)^{-1} K*; the matrix Herglotz function of the pair (K, L).
struct OperatorHerglotz {
  ComplexMatrix k;      // maps the inner space into the ambient space
  HermitianOperator l;  // inner self-adjoint generator

  OperatorHerglotz(ComplexMatrix k_, HermitianOperator l_)
      : k(std::move(k_)), l(std::move(l_)) {
    require_finite(k, "OperatorHerglotz");
    if (k.cols() != l.dim())
      throw DimensionError("OperatorHerglotz: K has " +
                           std::to_string(k.cols()) + " columns but L is " +
                           std::to_string(l.dim()) + "-dimensional");
  }

  int ambient_dim() const { return static_cast<int>(k.rows()); }

  ComplexMatrix eval(Complex z) const {
    const SpectralDecomposition& d = l.spectrum();
    Eigen::VectorXcd diag(d.dim());
    for (int m = 0; m < d.dim(); ++m) {
      const Complex den = d.eigenvalues(m) - z;
      if (std::abs(den) < 1e-12)
        throw DomainError("OperatorHerglotz: evaluation within 1e-12 of "
                          "eigenvalue " +
                          std::to_string(d.eigenvalues(m)));
      diag(m) = 1.0 / den;
    }
    const ComplexMatrix kv = k * d.eigenvectors;
    return ComplexMatrix(kv * diag.asDiagonal() * kv.adjoint());
  }
};

// Finite pole expansion sum_k Q_k / (t_k - z) with Hermitian PSD residues.
// Only occupied poles are stored.
struct MatrixRationalHerglotz {
  std::vector<double> poles;
  std::vector<ComplexMatrix> residues;

  ComplexMatrix eval(Complex z, int ambient_dim) const {
    ComplexMatrix acc = ComplexMatrix::Zero(ambient_dim, ambient_dim);
    for (size_t k = 0; k < poles.size(); ++k) {
      const Complex den = poles[k] - z;
      if (std::abs(den) < 1e-12)
        throw DomainError(
            "MatrixRationalHerglotz: evaluation within 1e-12 of pole " +
            std::to_string(poles[k]));
      acc += residues[k] / den;
    }
    return acc;
  }
};

namespace detail {

struct PoleSplit {
  std::vector<size_t> interior;
  std::vector<size_t> exterior;
};

inline PoleSplit classify_poles(const RationalHerglotz& p, const Contour& c) {
  PoleSplit s;
  for (size_t j = 0; j < p.poles.size(); ++j) {
    const Complex z(p.poles[j], 0.0);
    if (c.distance(z) <= 1e-10)
      throw DomainError("pole " + std::to_string(p.poles[j]) +
                        " lies on the contour boundary");
    if (c.strictly_inside(z))
      s.interior.push_back(j);
    else
      s.exterior.push_back(j);
  }
  return s;
}

}  // namespace detail

// True when every pole inside the contour lies strictly to the left of every
// pole outside it (over the union of both functions' poles).
inline bool left_segment_condition(const RationalHerglotz& p,
                                   const RationalHerglotz& q,
                                   const Contour& c) {
  double max_interior = -std::numeric_limits<double>::infinity();
  double min_exterior = std::numeric_limits<double>::infinity();
  for (const RationalHerglotz* f : {&p, &q}) {
    const detail::PoleSplit s = detail::classify_poles(*f, c);
    for (size_t j : s.interior)
      max_interior = std::max(max_interior, f->poles[j]);
    for (size_t j : s.exterior)
      min_exterior = std::min(min_exterior, f->poles[j]);
  }
  return max_interior < min_exterior;
}

// Closed form of (1 / 2 pi i) * clockwise loop of P(z) Q(z): only the
// interior/exterior cross terms survive. Every term is positive when the
// interior poles sit left of the exterior ones, which is what the default
// hypothesis enforcement guards.
inline double pair_integral_residue(const RationalHerglotz& p,
                                    const RationalHerglotz& q,
                                    const Contour& c,
                                    bool require_left_segment = true) {
  const detail::PoleSplit sp = detail::classify_poles(p, c);
  const detail::PoleSplit sq = detail::classify_poles(q, c);
  if (require_left_segment && !left_segment_condition(p, q, c))
    throw HypothesisError(
        "pair_integral_residue: an exterior pole lies left of an interior "
        "pole; positivity is not guaranteed");
  double acc = 0.0;
  for (size_t j : sp.interior)
    for (size_t l : sq.exterior)
      acc += p.weights[j] * q.weights[l] / (q.poles[l] - p.poles[j]);
  for (size_t j : sp.exterior)
    for (size_t l : sq.interior)
      acc += p.weights[j] * q.weights[l] / (p.poles[j] - q.poles[l]);
  return acc;
}

// Same integral by trapezoid quadrature along the clockwise rectangle.
inline double pair_integral_quadrature(const RationalHerglotz& p,
                                       const RationalHerglotz& q,
                                       const Contour& c, int n_points) {
  const double clearance = c.min_clearance(n_points);
  for (const RationalHerglotz* f : {&p, &q})
    for (double pole : f->poles)
      if (c.distance(Complex(pole, 0.0)) < clearance)
        throw DomainError("pair_integral_quadrature: pole " +
                          std::to_string(pole) +
                          " within clearance of the contour; enlarge "
                          "half_height or margin");
  const Complex value = contour_integral<Complex>(
      c, n_points, [&](Complex z) { return p.eval(z) * q.eval(z); });
  if (std::abs(value.imag()) > 1e-8)
    throw QuadratureError("pair_integral_quadrature: imaginary residue " +
                          std::to_string(value.imag()));
  return value.real();
}

// Hypothesis screen shared by the trace-integral routines: the encircled
// window (a, b) must contain every eigenvalue that is inside the contour,
// both spectra must sit strictly above a, and exterior spectrum must clear
// the contour on the right.
inline void check_trace_hypotheses(const OperatorHerglotz& m1,
                                   const OperatorHerglotz& m2,
                                   const Contour& c, int n_points) {
  if (m1.ambient_dim() != m2.ambient_dim())
    throw DimensionError("trace integral: ambient dimensions " +
                         std::to_string(m1.ambient_dim()) + " vs " +
                         std::to_string(m2.ambient_dim()));
  const double clearance = c.min_clearance(n_points);
  std::vector<std::string> failures;
  int idx = 0;
  for (const OperatorHerglotz* m : {&m1, &m2}) {
    ++idx;
    const RealVector& ev = m->l.spectrum().eigenvalues;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const double lam = ev(i);
      if (lam <= c.a)
        failures.push_back("operator " + std::to_string(idx) +
                           ": eigenvalue " + std::to_string(lam) +
                           " not strictly above a = " + std::to_string(c.a));
      else if (lam > c.b && lam <= c.x_hi() + clearance)
        failures.push_back("operator " + std::to_string(idx) +
                           ": exterior eigenvalue " + std::to_string(lam) +
                           " does not clear the contour's right edge");
      else if (c.distance(Complex(lam, 0.0)) < clearance)
        failures.push_back("operator " + std::to_string(idx) +
                           ": eigenvalue " + std::to_string(lam) +
                           " within clearance of the contour");
    }
  }
  if (!failures.empty()) {
    std::string msg = "trace integral hypotheses failed:";
    for (const std::string& f : failures) msg += "\n  " + f;
    throw HypothesisError(msg);
  }
}

struct TraceIntegralResult {
  double value;
  // Sampled sign conditions for the weight on (a, b); the nonnegativity
  // contract for the integral applies only when both hold.
  bool phi_nonnegative;
  bool phi_nonincreasing;
};

// (1 / 2 pi i) * clockwise loop of phi(z) tr(M1(z) M2(z)) by quadrature.
inline TraceIntegralResult contour_trace_integral(const OperatorHerglotz& m1,
                                                  const OperatorHerglotz& m2,
                                                  const SmoothFunction& phi,
                                                  const Contour& c,
                                                  int n_points) {
  check_trace_hypotheses(m1, m2, c, n_points);
  const Complex raw = contour_integral<Complex>(c, n_points, [&](Complex z) {
    return phi.analytic(z) * trace_complex(ComplexMatrix(m1.eval(z) * m2.eval(z)));
  });
  if (std::abs(raw.imag()) > 1e-8)
    throw QuadratureError("contour_trace_integral: imaginary residue " +
                          std::to_string(raw.imag()));
  TraceIntegralResult r;
  r.value = raw.real();
  r.phi_nonnegative = true;
  r.phi_nonincreasing = true;
  const int samples = 101;
  double prev = phi.value(c.a);
  for (int i = 0; i < samples; ++i) {
    const double x = c.a + (c.b - c.a) * i / (samples - 1);
    const double y = phi.value(x);
    if (y < -1e-12) r.phi_nonnegative = false;
    if (i > 0 && y > prev + 1e-12) r.phi_nonincreasing = false;
    prev = y;
  }
  return r;
}

namespace detail {

// Partition points t_k = a + k (b - a) / n, with t_n pinned to b.
inline double partition_point(double a, double b, int n, int k) {
  if (k <= 0) return a;
  if (k >= n) return b;
  return a + (b - a) * (static_cast<double>(k) / n);
}

// Smallest k >= 1 with lambda < t_k; the cell [t_{k-1}, t_k) maps to t_k.
inline int partition_cell(double a, double b, int n, double lambda) {
  const double h = (b - a) / n;
  int k = static_cast<int>(std::floor((lambda - a) / h));
  k = std::clamp(k, 0, n - 1);
  while (k >= 1 && lambda < partition_point(a, b, n, k)) --k;
  while (k < n && lambda >= partition_point(a, b, n, k + 1)) ++k;
  return k + 1;
}

}  // namespace detail

struct DiscretizedOperator {
  HermitianOperator op;
  int snapped_count = 0;        // eigenvalues moved onto partition points
  int below_a_count = 0;        // retained unchanged; outside the hypothesis
  double max_shift = 0.0;
};

// Snap every eigenvalue in (a, b) up to the right endpoint of its partition
// cell; eigenvalues at or below a and at or above b are kept as they are.
// A nonzero below_a_count signals input outside the intended hypotheses.
inline DiscretizedOperator discretize_spectrum(const HermitianOperator& l,
                                               double a, double b, int n) {
  if (!(a < b)) throw DomainError("discretize_spectrum: need a < b");
  if (n < 1) throw DomainError("discretize_spectrum: need n >= 1");
  const SpectralDecomposition& d = l.spectrum();
  RealVector mapped(d.dim());
  DiscretizedOperator out{HermitianOperator::zero(l.dim()), 0, 0, 0.0};
  for (int i = 0; i < d.dim(); ++i) {
    const double lam = d.eigenvalues(i);
    if (lam > a && lam < b) {
      const int k = detail::partition_cell(a, b, n, lam);
      mapped(i) = detail::partition_point(a, b, n, k);
      out.snapped_count += 1;
      out.max_shift = std::max(out.max_shift, mapped(i) - lam);
    } else {
      mapped(i) = lam;
      if (lam <= a) out.below_a_count += 1;
    }
  }
  const ComplexMatrix rebuilt =
      d.eigenvectors * mapped.asDiagonal() * d.eigenvectors.adjoint();
  out.op = HermitianOperator(hermitize(rebuilt));
  return out;
}

inline OperatorHerglotz discretized_operator_herglotz(const OperatorHerglotz& m,
                                                      double a, double b,
                                                      int n) {
  return OperatorHerglotz(m.k, discretize_spectrum(m.l, a, b, n).op);
}

// Q_k = K E_L([t_{k-1}, t_k)) K* for the occupied partition cells.
inline MatrixRationalHerglotz residue_blocks(const OperatorHerglotz& m,
                                             double a, double b, int n) {
  if (!(a < b)) throw DomainError("residue_blocks: need a < b");
  if (n < 1) throw DomainError("residue_blocks: need n >= 1");
  const SpectralDecomposition& d = m.l.spectrum();
  std::map<int, ComplexMatrix> cells;
  for (int i = 0; i < d.dim(); ++i) {
    const double lam = d.eigenvalues(i);
    if (!(lam > a && lam < b)) continue;
    const int k = detail::partition_cell(a, b, n, lam);
    const Eigen::VectorXcd v = m.k * d.eigenvectors.col(i);
    auto [it, inserted] = cells.try_emplace(
        k, ComplexMatrix::Zero(m.ambient_dim(), m.ambient_dim()));
    it->second += v * v.adjoint();
  }
  MatrixRationalHerglotz out;
  for (const auto& [k, q] : cells) {
    out.poles.push_back(detail::partition_point(a, b, n, k));
    out.residues.push_back(hermitize(q));
  }
  return out;
}

namespace detail {

// Compression of M to the spectral subspace of L at or above b; its poles
// all sit right of the contour, so it is analytic inside.
struct TailComponent {
  std::vector<double> lambdas;
  ComplexMatrix w;  // columns K u_m for the retained eigenvectors

  static TailComponent of(const OperatorHerglotz& m, double b) {
    const SpectralDecomposition& d = m.l.spectrum();
    std::vector<int> idx;
    for (int i = 0; i < d.dim(); ++i)
      if (d.eigenvalues(i) >= b) idx.push_back(i);
    TailComponent t;
    t.w = ComplexMatrix(m.ambient_dim(), static_cast<Eigen::Index>(idx.size()));
    for (size_t c = 0; c < idx.size(); ++c) {
      t.lambdas.push_back(d.eigenvalues(idx[c]));
      t.w.col(static_cast<Eigen::Index>(c)) = m.k * d.eigenvectors.col(idx[c]);
    }
    return t;
  }

  bool empty() const { return lambdas.empty(); }

  ComplexMatrix eval(Complex z, int ambient_dim) const {
    ComplexMatrix acc = ComplexMatrix::Zero(ambient_dim, ambient_dim);
    for (size_t m = 0; m < lambdas.size(); ++m)
      acc += (w.col(static_cast<Eigen::Index>(m)) *
              w.col(static_cast<Eigen::Index>(m)).adjoint()) /
             (lambdas[m] - z);
    return acc;
  }
};

}  // namespace detail

struct JDecomposition {
  double j1;  // residue part: both factors from the partition blocks
  double j2;  // quadrature of the tail/tail product; identically 0 in theory
  double j3;  // tail of the first factor against blocks of the second
  double j4;  // blocks of the first factor against tail of the second
  double total() const { return j1 + j2 + j3 + j4; }
};

// Split of the discretized trace integral into the four cross terms. With a
// nonnegative nonincreasing weight, j1, j3 and j4 are sums of nonnegative
// closed-form terms; j2 vanishes because its integrand is analytic inside.
inline JDecomposition j_decomposition(const OperatorHerglotz& m1,
                                      const OperatorHerglotz& m2,
                                      const SmoothFunction& phi, double a,
                                      double b, int n, const Contour& c,
                                      int n_points) {
  if (!(c.a == a && c.b == b))
    throw DomainError("j_decomposition: contour window differs from (a, b)");
  check_trace_hypotheses(m1, m2, c, n_points);
  // The tail compressions are inverted at partition points up to b, so the
  // split needs the exterior spectrum strictly beyond the contour.
  for (const OperatorHerglotz* m : {&m1, &m2}) {
    const RealVector& ev = m->l.spectrum().eigenvalues;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev(i) >= b && ev(i) <= c.x_hi() + c.min_clearance(n_points))
        throw HypothesisError(
            "j_decomposition: eigenvalue " + std::to_string(ev(i)) +
            " in [b, contour right edge]; tail inversion undefined");
  }

  const MatrixRationalHerglotz r1 = residue_blocks(m1, a, b, n);
  const MatrixRationalHerglotz r2 = residue_blocks(m2, a, b, n);
  const detail::TailComponent t1 = detail::TailComponent::of(m1, b);
  const detail::TailComponent t2 = detail::TailComponent::of(m2, b);
  const int dim = m1.ambient_dim();

  JDecomposition out{0.0, 0.0, 0.0, 0.0};

  for (size_t k = 0; k < r1.poles.size(); ++k) {
    for (size_t m = 0; m < r2.poles.size(); ++m) {
      const double tk = r1.poles[k];
      const double tm = r2.poles[m];
      const double pair_trace =
          trace(ComplexMatrix(r1.residues[k] * r2.residues[m]));
      if (tk == tm) {
        out.j1 -= phi.derivative(tk) * pair_trace;
      } else {
        out.j1 -= (phi.value(tk) - phi.value(tm)) / (tk - tm) * pair_trace;
      }
    }
  }

  if (!t1.empty() && !t2.empty()) {
    const Complex j2 = contour_integral<Complex>(c, n_points, [&](Complex z) {
      return phi.analytic(z) *
             trace_complex(ComplexMatrix(t1.eval(z, dim) * t2.eval(z, dim)));
    });
    if (std::abs(j2.imag()) > 1e-8)
      throw QuadratureError("j_decomposition: imaginary residue in j2: " +
                            std::to_string(j2.imag()));
    out.j2 = j2.real();
  }

  if (!t1.empty())
    for (size_t m = 0; m < r2.poles.size(); ++m)
      out.j3 += phi.value(r2.poles[m]) *
                trace(ComplexMatrix(t1.eval(Complex(r2.poles[m], 0.0), dim) *
                                    r2.residues[m]));
  if (!t2.empty())
    for (size_t k = 0; k < r1.poles.size(); ++k)
      out.j4 += phi.value(r1.poles[k]) *
                trace(ComplexMatrix(r1.residues[k] *
                                    t2.eval(Complex(r1.poles[k], 0.0), dim)));
  return out;
}

// Totals of the split along a refinement sequence of the partition.
inline std::vector<double> convergence_check(const OperatorHerglotz& m1,
                                             const OperatorHerglotz& m2,
                                             const SmoothFunction& phi,
                                             const Contour& c, double a,
                                             double b,
                                             const std::vector<int>& n_sequence,
                                             int n_points) {
  if (n_sequence.empty())
    throw DomainError("convergence_check: empty refinement sequence");
  std::vector<double> totals;
  totals.reserve(n_sequence.size());
  for (int n : n_sequence)
    totals.push_back(
        j_decomposition(m1, m2, phi, a, b, n, c, n_points).total());
  return totals;
}

}  // namespace specshift
