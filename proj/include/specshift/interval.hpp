#pragma once

#include <limits>
#include <string>

#include "specshift/core.hpp"

namespace specshift {

// Interval of the real line. Infinite endpoints are always open.
struct RealInterval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool lower_closed = false;
  bool upper_closed = false;

  RealInterval() = default;

  RealInterval(double lo, double hi, bool lo_closed, bool hi_closed)
      : lower(lo), upper(hi), lower_closed(lo_closed), upper_closed(hi_closed) {
    if (std::isnan(lo) || std::isnan(hi))
      throw DomainError("RealInterval: NaN endpoint");
    if (lo > hi)
      throw DomainError("RealInterval: lower " + std::to_string(lo) +
                        " exceeds upper " + std::to_string(hi));
    if (std::isinf(lower)) lower_closed = false;
    if (std::isinf(upper)) upper_closed = false;
  }

  static RealInterval all() { return RealInterval(); }

  static RealInterval less_than(double mu) {
    return RealInterval(-std::numeric_limits<double>::infinity(), mu, false,
                        false);
  }

  static RealInterval open(double lo, double hi) {
    return RealInterval(lo, hi, false, false);
  }

  static RealInterval closed(double lo, double hi) {
    return RealInterval(lo, hi, true, true);
  }

  static RealInterval half_open(double lo, double hi) {  // [lo, hi)
    return RealInterval(lo, hi, true, false);
  }

  bool contains(double x) const {
    if (x < lower || (x == lower && !lower_closed)) return false;
    if (x > upper || (x == upper && !upper_closed)) return false;
    return true;
  }

  bool bounded() const { return std::isfinite(lower) && std::isfinite(upper); }

  std::string str() const {
    std::string s = lower_closed ? "[" : "(";
    s += std::isinf(lower) ? "-inf" : std::to_string(lower);
    s += ",";
    s += std::isinf(upper) ? "+inf" : std::to_string(upper);
    s += upper_closed ? "]" : ")";
    return s;
  }
};

}  // namespace specshift
