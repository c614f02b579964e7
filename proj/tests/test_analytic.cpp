#include <catch2/catch_amalgamated.hpp>

#include "specshift/analytic.hpp"
#include "specshift/random.hpp"

using namespace specshift;

namespace {

HermitianOperator scalar(double x) {
  ComplexMatrix m(1, 1);
  m(0, 0) = x;
  return HermitianOperator(m);
}

OperatorFamily scalar_linear(double slope) {
  return OperatorFamily(FamilyKind::linear, {scalar(slope)},
                        RealInterval::open(-4.0, 4.0));
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
  return g;
}

}  // namespace

TEST_CASE("smoothed indicator stays in the unit band and decreases") {
  const SmoothFunction phi = smoothed_indicator(0.3, 1e-3);
  double prev = 2.0;
  for (double x : grid(-2.0, 2.0, 401)) {
    const double y = phi.value(x);
    CHECK(y >= 0.0);
    CHECK(y <= 1.0);
    CHECK(y <= prev + 1e-15);
    prev = y;
  }
  CHECK_THROWS_AS(smoothed_indicator(0.3, 0.0), DomainError);
}

TEST_CASE("scheduled smoothing recovers the projected trace") {
  // scalar case: eigenvalue 0, threshold 0.5, weight 1; the projection
  // counts the eigenvalue, and the smoothed trace converges to 1.
  const double g = 0.5;
  const RegularizationReport r = regularization_limit_check(
      scalar(0.0), scalar(1.0), 0.5,
      {1e-2 * g * g, 1e-4 * g * g, 1e-6 * g * g, 1e-8 * g * g});
  CHECK(r.projected_trace == Catch::Approx(1.0));
  CHECK(r.gap == Catch::Approx(0.5));
  CHECK(r.final_error() <= 1e-6);
  // errors shrink along the schedule
  CHECK(std::abs(r.values.back() - r.projected_trace) <
        std::abs(r.values.front() - r.projected_trace));
}

TEST_CASE("threshold on top of an eigenvalue is refused") {
  CHECK_THROWS_AS(
      regularization_limit_check(scalar(0.0), scalar(1.0), 1e-13, {1e-4}),
      DomainError);
}

TEST_CASE("derivative formula in the scalar linear case is exactly one") {
  // H(s) = s, phi the identity: d/ds tr(phi(H(s))) = 1. The curvature term
  // vanishes and the loop term equals -1.
  const Contour c(-1.0, 1.0, 0.5, 0.3);
  const DerivativeFormulaResult r = derivative_formula_check(
      scalar(0.0), scalar_linear(1.0), 0.2, stock::identity(), c, 768);
  CHECK(r.analytic == Catch::Approx(1.0).margin(1e-9));
  CHECK(r.finite_diff == Catch::Approx(1.0).margin(1e-6));
  CHECK(r.gap() <= 1e-6);
}

TEST_CASE("derivative formula agrees with finite differences on a seeded pair") {
  SplitMix64 rng(17);
  const HermitianOperator h0 = random_hermitian(rng, 4, 1.0);
  const OperatorFamily f(FamilyKind::linear, {random_hermitian(rng, 4, 0.8)},
                         RealInterval::open(-2.0, 2.0));
  const double pad = 2.0;
  const Contour c(h0.min_eigenvalue() - pad, h0.max_eigenvalue() + pad, 0.8,
                  0.3);
  const DerivativeFormulaResult r = derivative_formula_check(
      h0, f, 0.25, stock::exp_decay(1.0), c, 768);
  CHECK(r.gap() <= 1e-5 * (1.0 + std::abs(r.analytic)));
}

TEST_CASE("derivative sign scan matches the scalar chain rule") {
  // V(s) = s - 0.4 s^2 on H0 = 0, phi = e^{-x}. The scanned quantity is
  // d/ds [V'(s) phi(h(s))] with h(s) = s - 0.4 s^2, which splits as
  // V'' phi(h) (first term) minus (V')^2 (-phi'(h)) (loop term):
  //   -0.8 e^{-h} - (1 - 0.8 s)^2 e^{-h}.
  const OperatorFamily f(FamilyKind::quadratic_concave,
                         {scalar(1.0), scalar(-0.4)},
                         RealInterval::open(-2.0, 2.0));
  const Contour c(-1.0, 1.5, 0.6, 0.3);
  const SmoothFunction phi = stock::exp_decay(1.0);
  const std::vector<double> g = grid(0.05, 0.45, 5);
  const DerivativeSignReport r =
      derivative_sign_scan(scalar(0.0), f, phi, c, 768, g);
  CHECK(r.violations.empty());
  for (size_t i = 0; i < g.size(); ++i) {
    const double s = g[i];
    const double h = s - 0.4 * s * s;
    const double vp = 1.0 - 0.8 * s;
    const double expect = -std::exp(-h) * (0.8 + vp * vp);
    CHECK(r.derivatives[i] == Catch::Approx(expect).margin(1e-8));
    CHECK(r.first_terms[i] == Catch::Approx(-0.8 * std::exp(-h)).margin(1e-8));
    CHECK(r.contour_terms[i] ==
          Catch::Approx(vp * vp * std::exp(-h)).margin(1e-8));
  }
}

TEST_CASE("derivative sign scan rejects a convex family") {
  const OperatorFamily convex(FamilyKind::matrix_polynomial,
                              {scalar(0.0), scalar(1.0), scalar(0.0)},
                              RealInterval::open(-1.0, 1.0));
  const Contour c(-1.0, 1.0, 0.5, 0.3);
  CHECK_THROWS_AS(derivative_sign_scan(scalar(0.0), convex,
                                       stock::exp_decay(1.0), c, 512,
                                       grid(0.05, 0.3, 4)),
                  HypothesisError);
}

TEST_CASE("two route identity against the scalar closed form") {
  // H(s) = s on H0 = 0: tr(phi(H(s)) - phi(H0)) = phi(s) - phi(0) for any
  // weight, which pins both routes at once.
  const double anchor = 0.7;
  const SmoothFunction phi = stock::shifted_tanh(1.0, anchor);
  const std::vector<double> g = grid(0.0, 0.5, 11);
  const SemiboundedReport r =
      semibounded_concavity_check(scalar(0.0), scalar_linear(1.0), phi, g);
  REQUIRE(r.direct.size() == g.size());
  for (size_t i = 0; i < g.size(); ++i) {
    const double expect = phi.value(g[i]) - phi.value(0.0);
    CHECK(r.direct[i] == Catch::Approx(expect).margin(1e-12));
    CHECK(std::abs(r.direct[i] - r.ibp[i]) <= 1e-7);
  }
  CHECK(r.max_identity_gap <= 1e-7);
  CHECK(r.concavity_violations.empty());
}

TEST_CASE("two route identity on a seeded linear family") {
  SplitMix64 rng(23);
  const HermitianOperator h0 = random_hermitian(rng, 5, 1.0);
  const OperatorFamily f(FamilyKind::linear, {random_hermitian(rng, 5, 0.7)},
                         RealInterval::open(-2.0, 2.0));
  const std::vector<double> g = grid(0.0, 0.5, 21);
  double hi = h0.max_eigenvalue();
  for (double s : g)
    hi = std::max(hi, (h0 + f.eval(s).v).max_eigenvalue());
  const SmoothFunction phi = stock::shifted_tanh(1.0, hi + 0.2);
  const SemiboundedReport r = semibounded_concavity_check(h0, f, phi, g);
  CHECK(r.max_identity_gap <= 1e-7);
  CHECK(r.concavity_violations.empty());
}

TEST_CASE("convex weight is rejected by the semibounded check") {
  CHECK_THROWS_AS(
      semibounded_concavity_check(scalar(0.0), scalar_linear(1.0),
                                  stock::exp_decay(1.0), grid(0.0, 0.5, 5)),
      HypothesisError);
}

TEST_CASE("weight without second derivative is rejected") {
  const SmoothFunction bare("bare", [](double x) { return -x; },
                            [](double) { return -1.0; }, std::nullopt,
                            std::nullopt, std::nullopt);
  CHECK_THROWS_AS(semibounded_concavity_check(
                      scalar(0.0), scalar_linear(1.0), bare,
                      grid(0.0, 0.5, 5)),
                  DomainError);
}

TEST_CASE("truncation of a zero family is identically zero") {
  SplitMix64 rng(2);
  const HermitianOperator h0 = random_hermitian(rng, 6, 1.0);
  const OperatorFamily f(FamilyKind::linear, {HermitianOperator::zero(6)},
                         RealInterval::open(-1.0, 1.0));
  const TruncationTable t = truncation_experiment(
      h0, f, grid(0.0, 0.5, 5), {1.0, 2.0, 10.0}, 0.1, 1e-3);
  for (const auto& row : t.values)
    for (double v : row) CHECK(v == Catch::Approx(0.0).margin(1e-14));
  CHECK(t.columns_converged(1e-12));
}

TEST_CASE("window wider than the spectrum reproduces the full trace") {
  SplitMix64 rng(4);
  const HermitianOperator h0 = random_hermitian(rng, 5, 1.0);
  const OperatorFamily f(FamilyKind::linear, {random_hermitian(rng, 5, 0.6)},
                         RealInterval::open(-1.0, 1.0));
  const std::vector<double> g = grid(0.0, 0.4, 5);
  const double wide = 50.0;
  const double mu = 0.15, eps = 1e-3;
  const TruncationTable t =
      truncation_experiment(h0, f, g, {wide, 2.0 * wide}, mu, eps);
  const SmoothFunction phi = smoothed_indicator(mu, eps);
  for (size_t j = 0; j < g.size(); ++j) {
    const FamilyValue fv = f.eval(g[j]);
    const HermitianOperator h = h0 + fv.v;
    const HermitianOperator w = apply_function(h, phi.value_fn());
    const double oracle =
        trace(ComplexMatrix(fv.first.matrix() * w.matrix()));
    CHECK(t.values[0][j] == Catch::Approx(oracle).margin(1e-10));
    CHECK(t.values[1][j] == Catch::Approx(oracle).margin(1e-10));
  }
  CHECK(t.max_column_gap <= 1e-12);
}

TEST_CASE("heat trace of the scalar family is the scalar exponential") {
  const std::vector<double> g = grid(0.0, 1.0, 21);
  const std::vector<HeatTraceReport> reports =
      heat_trace_convexity(scalar(0.0), scalar_linear(1.0), {0.5, 1.0, 2.0},
                           g);
  REQUIRE(reports.size() == 3);
  for (const HeatTraceReport& r : reports) {
    CHECK(r.scan.violations.empty());
    for (size_t i = 0; i < g.size(); ++i)
      CHECK(r.scan.values[i] ==
            Catch::Approx(std::exp(-r.t * g[i]) - 1.0).margin(1e-13));
  }
}

TEST_CASE("heat trace near t = 0 is uniformly small") {
  const std::vector<HeatTraceReport> reports = heat_trace_convexity(
      scalar(0.0), scalar_linear(1.0), {1e-8}, grid(0.0, 1.0, 11));
  for (double v : reports.front().scan.values) CHECK(std::abs(v) <= 1e-7);
}

TEST_CASE("nonpositive heat time is rejected") {
  CHECK_THROWS_AS(heat_trace_convexity(scalar(0.0), scalar_linear(1.0),
                                       {-1.0}, grid(0.0, 1.0, 5)),
                  DomainError);
}
