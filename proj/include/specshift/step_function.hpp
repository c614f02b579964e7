#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "specshift/core.hpp"
#include "specshift/interval.hpp"

namespace specshift {

// Piecewise-constant function with strictly ascending breakpoints b_1..b_m and
// m+1 values: values[0] on (-inf, b_1), values[i] on [b_i, b_{i+1}),
// values[m] on [b_m, inf). Right-continuous at the breakpoints.
class StepFunction {
 public:
  StepFunction() : values_{0.0} {}

  StepFunction(std::vector<double> breakpoints, std::vector<double> values)
      : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (values_.size() != breakpoints_.size() + 1)
      throw DomainError("StepFunction: need one more value than breakpoints");
    for (size_t i = 0; i + 1 < breakpoints_.size(); ++i)
      if (!(breakpoints_[i] < breakpoints_[i + 1]))
        throw DomainError("StepFunction: breakpoints not strictly ascending");
    for (double b : breakpoints_)
      if (!std::isfinite(b))
        throw DomainError("StepFunction: non-finite breakpoint");
    for (double v : values_)
      if (!std::isfinite(v)) throw DomainError("StepFunction: non-finite value");
  }

  static StepFunction constant(double v) {
    return StepFunction({}, {v});
  }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  size_t piece_count() const { return values_.size(); }

  double operator()(double x) const {
    const auto it =
        std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return values_[static_cast<size_t>(it - breakpoints_.begin())];
  }

  double left_tail() const { return values_.front(); }
  double right_tail() const { return values_.back(); }

  // Drop breakpoints that separate equal values (exact comparison; the shift
  // functions handled here are integer-valued, so equality is meaningful).
  StepFunction pruned() const {
    std::vector<double> bp;
    std::vector<double> vals{values_.front()};
    for (size_t i = 0; i < breakpoints_.size(); ++i) {
      if (values_[i + 1] != vals.back()) {
        bp.push_back(breakpoints_[i]);
        vals.push_back(values_[i + 1]);
      }
    }
    return StepFunction(std::move(bp), std::move(vals));
  }

  template <typename Op>
  StepFunction combine(const StepFunction& other, Op op) const {
    std::vector<double> bp;
    bp.reserve(breakpoints_.size() + other.breakpoints_.size());
    std::set_union(breakpoints_.begin(), breakpoints_.end(),
                   other.breakpoints_.begin(), other.breakpoints_.end(),
                   std::back_inserter(bp));
    std::vector<double> vals;
    vals.reserve(bp.size() + 1);
    vals.push_back(op(values_.front(), other.values_.front()));
    for (double b : bp) vals.push_back(op((*this)(b), other(b)));
    return StepFunction(std::move(bp), std::move(vals)).pruned();
  }

  StepFunction operator-(const StepFunction& other) const {
    return combine(other, [](double x, double y) { return x - y; });
  }

  StepFunction abs() const {
    std::vector<double> vals = values_;
    for (double& v : vals) v = std::abs(v);
    return StepFunction(breakpoints_, std::move(vals)).pruned();
  }

  bool compactly_supported() const {
    return values_.front() == 0.0 && values_.back() == 0.0;
  }

  // Exact Lebesgue integral over the whole line; requires zero tails.
  double integral() const {
    if (!compactly_supported())
      throw DomainError("StepFunction::integral: nonzero tail value");
    double acc = 0.0;
    for (size_t i = 1; i + 1 < values_.size(); ++i)
      acc += values_[i] * (breakpoints_[i] - breakpoints_[i - 1]);
    return acc;
  }

  double l1_norm() const { return abs().integral(); }

  // Exact integral over an interval; endpoint open/closed flags do not matter
  // for the measure. An unbounded overlap with a nonzero value is an error.
  double integral_over(const RealInterval& delta) const {
    double acc = 0.0;
    const size_t m = breakpoints_.size();
    for (size_t i = 0; i < values_.size(); ++i) {
      const double lo =
          (i == 0) ? -std::numeric_limits<double>::infinity() : breakpoints_[i - 1];
      const double hi =
          (i == m) ? std::numeric_limits<double>::infinity() : breakpoints_[i];
      const double cut_lo = std::max(lo, delta.lower);
      const double cut_hi = std::min(hi, delta.upper);
      if (cut_lo >= cut_hi) continue;
      if (std::isinf(cut_hi - cut_lo)) {
        if (values_[i] != 0.0)
          throw DomainError(
              "StepFunction::integral_over: unbounded overlap with nonzero "
              "value");
        continue;
      }
      acc += values_[i] * (cut_hi - cut_lo);
    }
    return acc;
  }

  // Sum of value_i * (f(b_{i+1}) - f(b_i)) over the interior pieces. Equal to
  // the integral of f' against this function when the tails vanish, without
  // any quadrature.
  double integrate_derivative_of(const std::function<double(double)>& f) const {
    if (!compactly_supported())
      throw DomainError(
          "StepFunction::integrate_derivative_of: nonzero tail value");
    double acc = 0.0;
    for (size_t i = 1; i + 1 < values_.size(); ++i)
      acc += values_[i] * (f(breakpoints_[i]) - f(breakpoints_[i - 1]));
    return acc;
  }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

}  // namespace specshift
