#include <catch2/catch_amalgamated.hpp>

#include "specshift/step_function.hpp"

using namespace specshift;

TEST_CASE("step function evaluation is right continuous") {
  const StepFunction f({0.0, 1.0}, {0.0, 1.0, 0.0});
  CHECK(f(-0.5) == 0.0);
  CHECK(f(0.0) == 1.0);
  CHECK(f(0.999) == 1.0);
  CHECK(f(1.0) == 0.0);
}

TEST_CASE("integral of a unit bump") {
  const StepFunction f({0.0, 1.0}, {0.0, 1.0, 0.0});
  CHECK(f.integral() == Catch::Approx(1.0));
  CHECK(f.l1_norm() == Catch::Approx(1.0));
}

TEST_CASE("integral rejects nonzero tails") {
  const StepFunction f({0.0}, {0.0, 1.0});
  CHECK_THROWS_AS(f.integral(), DomainError);
}

TEST_CASE("difference and absolute value") {
  const StepFunction f({0.0, 2.0}, {0.0, 1.0, 0.0});
  const StepFunction g({1.0, 2.0}, {0.0, 3.0, 0.0});
  const StepFunction d = f - g;
  CHECK(d(0.5) == 1.0);
  CHECK(d(1.5) == -2.0);
  CHECK(d.integral() == Catch::Approx(1.0 * 1.0 - 2.0 * 1.0));
  CHECK(d.abs().integral() == Catch::Approx(1.0 * 1.0 + 2.0 * 1.0));
}

TEST_CASE("clipped integral over subintervals") {
  const StepFunction f({0.0, 1.0}, {0.0, 2.0, 0.0});
  CHECK(f.integral_over(RealInterval::open(0.25, 0.5)) ==
        Catch::Approx(0.5));
  CHECK(f.integral_over(RealInterval::less_than(0.5)) == Catch::Approx(1.0));
  CHECK(f.integral_over(RealInterval::all()) == Catch::Approx(2.0));
  CHECK(f.integral_over(RealInterval::open(2.0, 3.0)) == 0.0);
}

TEST_CASE("stieltjes pairing with a smooth function") {
  // integral of phi' against the unit bump on [0,1) is phi(1) - phi(0)
  const StepFunction f({0.0, 1.0}, {0.0, 1.0, 0.0});
  const double v =
      f.integrate_derivative_of([](double x) { return x * x; });
  CHECK(v == Catch::Approx(1.0));
  const double w =
      f.integrate_derivative_of([](double x) { return std::exp(-x); });
  CHECK(w == Catch::Approx(std::exp(-1.0) - 1.0));
}

TEST_CASE("combine with max keeps the upper envelope") {
  const StepFunction f({0.0}, {0.0, 2.0});
  const StepFunction g({1.0}, {1.0, 0.0});
  const StepFunction h =
      f.combine(g, [](double a, double b) { return std::max(a, b); });
  CHECK(h(-1.0) == 1.0);
  CHECK(h(0.5) == 2.0);
  CHECK(h(2.0) == 2.0);
}
