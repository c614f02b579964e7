#pragma once

#include <Eigen/LU>
#include <functional>
#include <string>

#include "specshift/contour.hpp"
#include "specshift/core.hpp"
#include "specshift/hermitian.hpp"

namespace specshift {

// f(A) as the clockwise resolvent integral (1/2pi i) * loop of f(z)(A-z)^-1.
// Resolvents come from LU solves, not from the eigendecomposition, so this is
// an independent route to the same operator as apply_function.
inline HermitianOperator riesz_apply(const HermitianOperator& a,
                                     const std::function<Complex(Complex)>& f,
                                     const Contour& c, int n_points) {
  const RealVector& ev = a.spectrum().eigenvalues;
  const double clearance = c.min_clearance(n_points);
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (!c.strictly_inside(Complex(ev(k), 0.0)))
      throw DomainError("riesz_apply: eigenvalue " + std::to_string(ev(k)) +
                        " not strictly inside the contour");
    if (c.distance(Complex(ev(k), 0.0)) < clearance)
      throw DomainError("riesz_apply: eigenvalue " + std::to_string(ev(k)) +
                        " within clearance of the contour");
  }
  const int n = a.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  ComplexMatrix result = contour_integral<ComplexMatrix>(
      c, n_points, [&](Complex z) -> ComplexMatrix {
        const ComplexMatrix shifted = a.matrix() - z * id;
        return ComplexMatrix(f(z) * shifted.partialPivLu().solve(id));
      });
  return HermitianOperator(hermitize(result));
}

}  // namespace specshift
