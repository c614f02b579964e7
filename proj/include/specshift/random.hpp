#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "specshift/core.hpp"
#include "specshift/hermitian.hpp"

namespace specshift {

// SplitMix64. Output sequence is a pure function of the seed, identical on
// every platform; this is the only entropy source in the library.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller, spelled out so the draw sequence is
  // fixed: two uniforms per pair, cosine branch first.
  double gaussian() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]; keeps the log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    return r * std::cos(a);
  }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;
  uint64_t state_;
  std::optional<double> spare_;
};

// Entries drawn row-major, real part before imaginary part.
inline ComplexMatrix random_complex_matrix(SplitMix64& rng, int rows,
                                           int cols) {
  ComplexMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double re = rng.gaussian();
      const double im = rng.gaussian();
      g(i, j) = Complex(re, im);
    }
  return g;
}

// scale * (G + G*) / 2 for a standard-normal complex G.
inline HermitianOperator random_hermitian(SplitMix64& rng, int dim,
                                          double scale) {
  const ComplexMatrix g = random_complex_matrix(rng, dim, dim);
  return HermitianOperator(ComplexMatrix(scale * 0.5 * (g + g.adjoint())));
}

// scale * B B* / dim for a standard-normal complex B: positive semidefinite.
inline HermitianOperator random_psd(SplitMix64& rng, int dim, double scale) {
  const ComplexMatrix b = random_complex_matrix(rng, dim, dim);
  return HermitianOperator(ComplexMatrix((scale / dim) * (b * b.adjoint())));
}

// Haar-like unitary: QR of a complex Gaussian with the phase convention
// that R has nonnegative diagonal.
inline ComplexMatrix random_unitary(SplitMix64& rng, int dim) {
  const ComplexMatrix g = random_complex_matrix(rng, dim, dim);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return q;
}

// Hermitian operator with exactly the prescribed eigenvalues.
inline HermitianOperator hermitian_with_spectrum(
    SplitMix64& rng, const std::vector<double>& eigenvalues) {
  const int dim = static_cast<int>(eigenvalues.size());
  if (dim == 0) throw DomainError("hermitian_with_spectrum: empty spectrum");
  const ComplexMatrix u = random_unitary(rng, dim);
  RealVector d(dim);
  for (int i = 0; i < dim; ++i) d(i) = eigenvalues[i];
  return HermitianOperator(hermitize(u * d.asDiagonal() * u.adjoint()));
}

}  // namespace specshift
