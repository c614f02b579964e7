#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "specshift/instance.hpp"

using namespace specshift;

namespace {

Json base_spec(const std::string& experiment) {
  return Json{{"seed", 7}, {"dim", 3}, {"experiment", experiment}};
}

Json strip_timing(Json report) {
  report.erase("timing_ms");
  return report;
}

}  // namespace

TEST_CASE("spec parsing enforces the required fields") {
  CHECK_THROWS_AS(parse_instance_spec(Json{{"experiment", "xi"}}), ParseError);
  CHECK_THROWS_AS(parse_instance_spec(Json{{"seed", 1}}), ParseError);
  CHECK_THROWS_AS(
      parse_instance_spec(Json{{"seed", 1}, {"experiment", "nope"}}),
      ParseError);
  CHECK_THROWS_AS(parse_instance_spec(
                      Json{{"seed", 1}, {"experiment", "xi"}, {"dim", 0}}),
                  ParseError);
  CHECK_THROWS_AS(parse_instance_spec(Json{{"seed", 1},
                                           {"experiment", "xi"},
                                           {"scale", -0.5}}),
                  ParseError);
}

TEST_CASE("explicit pairs must come complete and sized together") {
  Json j = base_spec("xi");
  j["h0"] = matrix_to_json(ComplexMatrix::Zero(2, 2));
  CHECK_THROWS_AS(parse_instance_spec(j), ParseError);
  j["v"] = matrix_to_json(ComplexMatrix::Identity(3, 3));
  CHECK_THROWS_AS(parse_instance_spec(j), ParseError);
  j["v"] = matrix_to_json(ComplexMatrix::Identity(2, 2));
  const InstanceSpec s = parse_instance_spec(j);
  const Instance inst = generate_instance(s);
  CHECK(inst.h0.dim() == 2);
}

TEST_CASE("generation is a pure function of the spec") {
  const InstanceSpec s =
      parse_instance_spec(Json{{"seed", 99},
                               {"dim", 5},
                               {"family_kind", "quadratic_concave"},
                               {"experiment", "xi"}});
  const Instance a = generate_instance(s);
  const Instance b = generate_instance(s);
  CHECK((a.h0.matrix() - b.h0.matrix()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.family.eval(0.3).v.matrix() - b.family.eval(0.3).v.matrix())
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("every experiment name dispatches") {
  for (const std::string& name : experiment_names()) {
    Json j = base_spec(name);
    if (name == "semibounded" || name == "lemma33") {
      j["family_kind"] = "linear";
    } else if (name == "heat" || name == "truncation" ||
               name == "monotonicity" || name == "concavity") {
      j["family_kind"] = "quadratic_concave";
    }
    const Report r = run(parse_instance_spec(j));
    INFO(name);
    CHECK(r.pass());
    CHECK(r.experiment == name);
    CHECK_FALSE(r.checks.empty());
  }
}

TEST_CASE("reports are deterministic apart from timing") {
  const InstanceSpec s = parse_instance_spec(base_spec("krein"));
  const Json a = strip_timing(run(s).to_json());
  const Json b = strip_timing(run(s).to_json());
  CHECK(canonical_json(a) == canonical_json(b));
  CHECK(a.contains("library_version"));
}

TEST_CASE("check records fail exactly above tolerance") {
  CHECK(make_check("x", 1.0, 1.0).pass);
  CHECK_FALSE(make_check("x", 1.0 + 1e-12, 1.0).pass);
  CHECK(make_check("count", 0.0, 0.0).pass);
}

TEST_CASE("suite executes specs in filename order and aggregates") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "specshift_suite_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "b_second.json")
        << canonical_json(base_spec("krein"));
    std::ofstream(dir / "a_first.json") << canonical_json(base_spec("xi"));
  }
  const SuiteResult r = run_suite(dir);
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0].name == "a_first");
  CHECK(r.entries[1].name == "b_second");
  CHECK(r.pass());
  fs::remove_all(dir);
}

TEST_CASE("suite captures runtime failures as failing reports") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "specshift_suite_fail";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    // concavity scan on a convex family trips the hypothesis screen
    Json j = base_spec("concavity");
    j["family_kind"] = "matrix_polynomial";
    j["seed"] = 3;
    std::ofstream(dir / "bad.json") << canonical_json(j);
    std::ofstream(dir / "good.json") << canonical_json(base_spec("xi"));
  }
  const SuiteResult r = run_suite(dir);
  REQUIRE(r.entries.size() == 2);
  CHECK_FALSE(r.pass());
  CHECK_FALSE(r.entries[0].report.pass());
  CHECK(r.entries[1].report.pass());
  fs::remove_all(dir);
}

TEST_CASE("suite respects the thread cap without changing results") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "specshift_suite_thr";
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (int i = 0; i < 6; ++i) {
    Json j = base_spec("krein");
    j["seed"] = 100 + i;
    std::ofstream(dir / ("s" + std::to_string(i) + ".json"))
        << canonical_json(j);
  }
  setenv("SPECSHIFT_THREADS", "2", 1);
  const SuiteResult two = run_suite(dir);
  setenv("SPECSHIFT_THREADS", "1", 1);
  const SuiteResult one = run_suite(dir);
  unsetenv("SPECSHIFT_THREADS");
  REQUIRE(two.entries.size() == one.entries.size());
  for (size_t i = 0; i < two.entries.size(); ++i) {
    CHECK(two.entries[i].name == one.entries[i].name);
    CHECK(canonical_json(strip_timing(two.entries[i].report.to_json())) ==
          canonical_json(strip_timing(one.entries[i].report.to_json())));
  }
  fs::remove_all(dir);
}

TEST_CASE("tolerance override lands in the executed parameters") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "specshift_suite_tol";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "avg.json") << canonical_json(base_spec("average"));
  const SuiteResult r = run_suite(dir, 1e-6);
  REQUIRE(r.entries.size() == 1);
  const Json echoed = r.entries[0].report.to_json()["spec"];
  CHECK(echoed["params"]["tol"].get<double>() == 1e-6);
  // the averaging gap is checked against 10x the requested tolerance
  CHECK(r.entries[0].report.checks.front().tolerance ==
        Catch::Approx(1e-5));
  fs::remove_all(dir);
}
