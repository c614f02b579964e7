#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace specshift {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// All library failures derive from Error so callers can catch one type.
// Messages carry the offending quantity (dimension, eigenvalue, field name).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class HypothesisError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

inline double max_abs(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

inline void require_finite(const ComplexMatrix& m, const std::string& name) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Complex& v = m(i, j);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw DomainError(name + ": non-finite entry at (" + std::to_string(i) +
                          "," + std::to_string(j) + ")");
    }
}

inline void require_square(const ComplexMatrix& m, const std::string& name) {
  if (m.rows() != m.cols())
    throw DimensionError(name + ": expected square matrix, got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
}

inline ComplexMatrix hermitize(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

// Complex trace, no reality requirement. Contour integrands need this.
inline Complex trace_complex(const ComplexMatrix& m) {
  require_square(m, "trace");
  return m.trace();
}

// Real trace of a matrix whose trace is real by construction (Hermitian, or a
// product of Hermitians). The imaginary residue is noise; anything above the
// threshold indicates a caller bug.
inline double trace(const ComplexMatrix& m) {
  const Complex t = trace_complex(m);
  if (std::abs(t.imag()) > 1e-10 * (1.0 + std::abs(t.real())))
    throw DomainError("trace: imaginary part " + std::to_string(t.imag()) +
                      " exceeds tolerance");
  return t.real();
}

}  // namespace specshift
