#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "specshift/core.hpp"
#include "specshift/interval.hpp"

namespace specshift {

// Eigenvalues ascending, eigenvectors orthonormal columns in matching order.
// Phase convention: in each column the largest-modulus component is real and
// nonnegative (ties broken by lowest index), so identical input bits yield
// identical output bits.
struct SpectralDecomposition {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
};

namespace detail {

inline void fix_phases(ComplexMatrix& u) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, j));
      if (a > best) {
        best = a;
        imax = i;
      }
    }
    if (best <= 0.0) continue;
    const Complex phase = u(imax, j) / best;
    u.col(j) *= std::conj(phase);
    u(imax, j) = Complex(std::abs(u(imax, j)), 0.0);
  }
}

inline SpectralDecomposition eig_hermitian_impl(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw Error("eig_hermitian: solver failed to converge on dimension " +
                std::to_string(m.rows()));
  SpectralDecomposition d;
  d.eigenvalues = solver.eigenvalues();
  d.eigenvectors = solver.eigenvectors();
  fix_phases(d.eigenvectors);

  const double scale = 1.0 + max_abs(m);
  const ComplexMatrix resid =
      m - d.eigenvectors * d.eigenvalues.asDiagonal() *
              d.eigenvectors.adjoint();
  if (max_abs(resid) > 1e-10 * scale)
    throw Error("eig_hermitian: backward error " +
                std::to_string(max_abs(resid)) + " exceeds tolerance");
  const ComplexMatrix gram = d.eigenvectors.adjoint() * d.eigenvectors -
                             ComplexMatrix::Identity(m.rows(), m.cols());
  if (max_abs(gram) > 1e-10)
    throw Error("eig_hermitian: eigenvector orthonormality defect " +
                std::to_string(max_abs(gram)));
  return d;
}

}  // namespace detail

// Hermitian matrix with a cached spectral decomposition. Construction
// symmetrizes (A + A*)/2 after checking the skew part is at noise level.
// Copies share state; the cache is filled once, thread-safely.
class HermitianOperator {
  struct State {
    ComplexMatrix matrix;
    mutable std::once_flag once;
    mutable std::optional<SpectralDecomposition> eig;
  };

 public:
  explicit HermitianOperator(const ComplexMatrix& m) {
    require_square(m, "HermitianOperator");
    require_finite(m, "HermitianOperator");
    const double skew = max_abs(ComplexMatrix(m - m.adjoint()));
    if (skew > 1e-12 * (1.0 + max_abs(m)))
      throw DomainError("HermitianOperator: skew part " +
                        std::to_string(skew) + " exceeds tolerance");
    auto st = std::make_shared<State>();
    st->matrix = hermitize(m);
    state_ = std::move(st);
  }

  static HermitianOperator zero(int dim) {
    return HermitianOperator(ComplexMatrix::Zero(dim, dim));
  }

  static HermitianOperator identity(int dim) {
    return HermitianOperator(ComplexMatrix::Identity(dim, dim));
  }

  int dim() const { return static_cast<int>(state_->matrix.rows()); }

  const ComplexMatrix& matrix() const { return state_->matrix; }

  const SpectralDecomposition& spectrum() const {
    const State& st = *state_;
    std::call_once(st.once,
                   [&st] { st.eig = detail::eig_hermitian_impl(st.matrix); });
    return *st.eig;
  }

  double min_eigenvalue() const { return spectrum().eigenvalues(0); }
  double max_eigenvalue() const {
    return spectrum().eigenvalues(dim() - 1);
  }

 private:
  std::shared_ptr<const State> state_;
};

inline const SpectralDecomposition& eig_hermitian(const HermitianOperator& a) {
  return a.spectrum();
}

inline HermitianOperator operator+(const HermitianOperator& a,
                                   const HermitianOperator& b) {
  if (a.dim() != b.dim())
    throw DimensionError("operator+: dimensions " + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()));
  return HermitianOperator(a.matrix() + b.matrix());
}

// Orthogonal projection onto the span of eigenvectors whose eigenvalues lie
// in the interval. Membership uses exact comparison on computed eigenvalues.
inline ComplexMatrix spectral_projection(const HermitianOperator& a,
                                         const RealInterval& delta) {
  const SpectralDecomposition& d = a.spectrum();
  ComplexMatrix p = ComplexMatrix::Zero(a.dim(), a.dim());
  for (int k = 0; k < d.dim(); ++k) {
    if (delta.contains(d.eigenvalues(k))) {
      const auto u = d.eigenvectors.col(k);
      p += u * u.adjoint();
    }
  }
  return hermitize(p);
}

// f(A) through the eigendecomposition; the result is re-symmetrized.
inline HermitianOperator apply_function(
    const HermitianOperator& a, const std::function<double(double)>& f) {
  const SpectralDecomposition& d = a.spectrum();
  RealVector vals(d.dim());
  for (int k = 0; k < d.dim(); ++k) {
    const double y = f(d.eigenvalues(k));
    if (!std::isfinite(y))
      throw DomainError("apply_function: non-finite value at eigenvalue " +
                        std::to_string(d.eigenvalues(k)));
    vals(k) = y;
  }
  ComplexMatrix out =
      d.eigenvectors * vals.asDiagonal() * d.eigenvectors.adjoint();
  return HermitianOperator(hermitize(out));
}

// Schatten p-norm from singular values; p = inf gives the operator norm.
inline double schatten_norm(const ComplexMatrix& m, double p) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const RealVector& s = svd.singularValues();
  if (std::isinf(p)) return s.size() ? s.maxCoeff() : 0.0;
  if (p < 1.0) throw DomainError("schatten_norm: p must be >= 1");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) acc += std::pow(s(i), p);
  return std::pow(acc, 1.0 / p);
}

// For Hermitian arguments the singular values are |eigenvalues|.
inline double schatten_norm(const HermitianOperator& a, double p) {
  const RealVector& ev = a.spectrum().eigenvalues;
  if (std::isinf(p)) return ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  if (p < 1.0) throw DomainError("schatten_norm: p must be >= 1");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    acc += std::pow(std::abs(ev(i)), p);
  return std::pow(acc, 1.0 / p);
}

inline double trace(const HermitianOperator& a) { return trace(a.matrix()); }

}  // namespace specshift
