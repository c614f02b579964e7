#pragma once

#include <string>
#include <vector>

#include "specshift/core.hpp"
#include "specshift/hermitian.hpp"
#include "specshift/interval.hpp"

namespace specshift {

enum class FamilyKind { linear, quadratic_concave, matrix_polynomial };

inline std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::linear: return "linear";
    case FamilyKind::quadratic_concave: return "quadratic_concave";
    case FamilyKind::matrix_polynomial: return "matrix_polynomial";
  }
  throw DomainError("FamilyKind: invalid value");
}

inline FamilyKind family_kind_from_string(const std::string& s) {
  if (s == "linear") return FamilyKind::linear;
  if (s == "quadratic_concave") return FamilyKind::quadratic_concave;
  if (s == "matrix_polynomial") return FamilyKind::matrix_polynomial;
  throw ParseError("family_kind: unknown value '" + s + "'");
}

struct FamilyValue {
  HermitianOperator v;
  HermitianOperator first;   // dV/ds
  HermitianOperator second;  // d2V/ds2
};

// Coupling path V(s) = sum_{k>=1} s^k C_k with Hermitian coefficients and
// V(0) = 0, defined on an open interval around 0. The quadratic_concave kind
// additionally guarantees C_2 <= 0 at construction.
class OperatorFamily {
 public:
  OperatorFamily(FamilyKind kind, std::vector<HermitianOperator> coefficients,
                 RealInterval domain)
      : kind_(kind), coeffs_(std::move(coefficients)), domain_(domain) {
    if (coeffs_.empty())
      throw DomainError("OperatorFamily: need at least one coefficient");
    for (size_t i = 1; i < coeffs_.size(); ++i)
      if (coeffs_[i].dim() != coeffs_[0].dim())
        throw DimensionError("OperatorFamily: coefficient " +
                             std::to_string(i + 1) + " has dimension " +
                             std::to_string(coeffs_[i].dim()) + ", expected " +
                             std::to_string(coeffs_[0].dim()));
    if (!(domain_.lower < 0.0 && domain_.upper > 0.0))
      throw DomainError("OperatorFamily: domain must contain 0");
    if (kind_ == FamilyKind::linear && coeffs_.size() != 1)
      throw DomainError("OperatorFamily: linear kind takes exactly C_1");
    if (kind_ == FamilyKind::quadratic_concave) {
      if (coeffs_.size() != 2)
        throw DomainError(
            "OperatorFamily: quadratic_concave kind takes C_1, C_2");
      const double top = coeffs_[1].max_eigenvalue();
      if (top > 1e-12)
        throw HypothesisError(
            "OperatorFamily: quadratic_concave requires C_2 <= 0, top "
            "eigenvalue " +
            std::to_string(top));
    }
  }

  FamilyKind kind() const { return kind_; }
  int dim() const { return coeffs_[0].dim(); }
  int degree() const { return static_cast<int>(coeffs_.size()); }
  const RealInterval& domain() const { return domain_; }
  const std::vector<HermitianOperator>& coefficients() const { return coeffs_; }

  // V, V', V'' at s; exact matrix polynomial evaluation.
  FamilyValue eval(double s) const {
    if (!domain_.contains(s))
      throw DomainError("OperatorFamily::eval: s = " + std::to_string(s) +
                        " outside domain " + domain_.str());
    const int n = dim();
    ComplexMatrix v = ComplexMatrix::Zero(n, n);
    ComplexMatrix d1 = ComplexMatrix::Zero(n, n);
    ComplexMatrix d2 = ComplexMatrix::Zero(n, n);
    double sk = s;  // s^k
    for (size_t k = 1; k <= coeffs_.size(); ++k) {
      const ComplexMatrix& c = coeffs_[k - 1].matrix();
      const double kd = static_cast<double>(k);
      v += sk * c;
      d1 += kd * (k >= 2 ? std::pow(s, kd - 1.0) : 1.0) * c;
      if (k >= 2) d2 += kd * (kd - 1.0) * std::pow(s, kd - 2.0) * c;
      sk *= s;
    }
    return FamilyValue{HermitianOperator(v), HermitianOperator(d1),
                       HermitianOperator(d2)};
  }

 private:
  FamilyKind kind_;
  std::vector<HermitianOperator> coeffs_;
  RealInterval domain_;
};

struct ConcavityWitness {
  bool concave = true;
  double worst_s = 0.0;
  double worst_eigenvalue = 0.0;  // top eigenvalue of V''(worst_s)
};

// V''(s) <= 0 (top eigenvalue below 1e-12) at every grid point.
inline ConcavityWitness check_concavity(const OperatorFamily& f,
                                        const std::vector<double>& grid) {
  ConcavityWitness w;
  w.worst_eigenvalue = -std::numeric_limits<double>::infinity();
  for (double s : grid) {
    const double top = f.eval(s).second.max_eigenvalue();
    if (top > w.worst_eigenvalue) {
      w.worst_eigenvalue = top;
      w.worst_s = s;
    }
  }
  w.concave = w.worst_eigenvalue <= 1e-12;
  return w;
}

}  // namespace specshift
