#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specshift/serialize.hpp"

#ifndef SPECSHIFT_CLI_PATH
#error "SPECSHIFT_CLI_PATH must point at the built binary"
#endif
#ifndef SPECSHIFT_FIXTURE_DIR
#error "SPECSHIFT_FIXTURE_DIR must point at the fixture directory"
#endif

namespace fs = std::filesystem;
using specshift::Json;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult cli(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "specshift_cli_out.txt";
  const std::string cmd = std::string(SPECSHIFT_CLI_PATH) + " " + args +
                          " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return RunResult{code, slurp(out)};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gen then run round trips with a clean exit") {
  const fs::path dir = fresh_dir("specshift_cli_roundtrip");
  const fs::path spec = dir / "spec.json";
  CHECK(cli("gen --seed 12 --dim 4 --kind linear --experiment krein --out " +
            spec.string())
            .exit_code == 0);
  const RunResult r = cli("run " + spec.string());
  CHECK(r.exit_code == 0);
  const Json report = Json::parse(r.out);
  CHECK(report["pass"].get<bool>());
  CHECK(report["experiment"].get<std::string>() == "krein");
  fs::remove_all(dir);
}

TEST_CASE("missing spec file is a usage error") {
  CHECK(cli("run /nonexistent/spec.json").exit_code == 2);
}

TEST_CASE("unknown experiment in gen is a usage error") {
  CHECK(cli("gen --seed 1 --experiment bogus").exit_code == 2);
}

TEST_CASE("malformed spec json exits with the parse code") {
  const fs::path dir = fresh_dir("specshift_cli_badjson");
  const fs::path spec = dir / "bad.json";
  std::ofstream(spec) << "{ nope";
  CHECK(cli("run " + spec.string()).exit_code == 2);
  fs::remove_all(dir);
}

TEST_CASE("shift function export matches the golden bytes") {
  const fs::path dir = fresh_dir("specshift_cli_xi");
  const fs::path out = dir / "xi.csv";
  const std::string fixtures = SPECSHIFT_FIXTURE_DIR;
  const RunResult r =
      cli("xi --h0 " + fixtures + "/h0_scalar.json --v " + fixtures +
          "/v_scalar.json --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(slurp(out) == "breakpoint,value\n-inf,0\n0,1\n1,0\n");
  const Json summary = Json::parse(r.out);
  CHECK(summary["v_trace"].get<double>() == 1.0);
  CHECK(summary["xi_l1"].get<double>() == 1.0);
  fs::remove_all(dir);
}

TEST_CASE("reports are byte identical across runs modulo timing") {
  const fs::path dir = fresh_dir("specshift_cli_det");
  const fs::path spec = dir / "spec.json";
  cli("gen --seed 5 --dim 5 --kind quadratic_concave --experiment "
      "monotonicity --out " +
      spec.string());
  Json a = Json::parse(cli("run " + spec.string()).out);
  Json b = Json::parse(cli("run " + spec.string()).out);
  a.erase("timing_ms");
  b.erase("timing_ms");
  CHECK(specshift::canonical_json(a) == specshift::canonical_json(b));
  fs::remove_all(dir);
}

TEST_CASE("out dir collects the report and csv artifacts") {
  const fs::path dir = fresh_dir("specshift_cli_artifacts");
  const fs::path spec = dir / "spec.json";
  cli("gen --seed 9 --dim 3 --kind linear --experiment xi --out " +
      spec.string());
  const fs::path out_dir = dir / "out";
  const RunResult r = cli("run " + spec.string() + " --out-dir " +
                          out_dir.string() + " --format csv");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out_dir / "spec_report.json"));
  CHECK(fs::exists(out_dir / "spec_checks.csv"));
  CHECK(fs::exists(out_dir / "spec_xi.csv"));
  const std::string checks = slurp(out_dir / "spec_checks.csv");
  CHECK(checks.rfind("name,value,tolerance,pass\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("suite aggregates to the worst exit code") {
  const fs::path dir = fresh_dir("specshift_cli_suite");
  cli("gen --seed 1 --dim 3 --experiment xi --out " +
      (dir / "a.json").string());
  cli("gen --seed 2 --dim 3 --experiment krein --out " +
      (dir / "b.json").string());
  const RunResult good = cli("suite " + dir.string());
  CHECK(good.exit_code == 0);
  const Json summary = Json::parse(good.out);
  CHECK(summary["pass"].get<bool>());
  CHECK(summary["count"].get<int>() == 2);

  // a spec whose hypotheses fail at run time must flip the suite
  Json bad{{"seed", 3},
           {"dim", 3},
           {"experiment", "concavity"},
           {"family_kind", "matrix_polynomial"}};
  std::ofstream(dir / "c.json") << specshift::canonical_json(bad);
  CHECK(cli("suite " + dir.string()).exit_code == 1);
  fs::remove_all(dir);
}

TEST_CASE("thread cap env var leaves suite results unchanged") {
  const fs::path dir = fresh_dir("specshift_cli_threads");
  for (int i = 0; i < 4; ++i)
    cli("gen --seed " + std::to_string(40 + i) + " --dim 4 --experiment "
        "krein --out " + (dir / ("s" + std::to_string(i) + ".json")).string());
  setenv("SPECSHIFT_THREADS", "3", 1);
  const RunResult multi = cli("suite " + dir.string());
  setenv("SPECSHIFT_THREADS", "1", 1);
  const RunResult single = cli("suite " + dir.string());
  unsetenv("SPECSHIFT_THREADS");
  CHECK(multi.exit_code == 0);
  CHECK(multi.out == single.out);
  fs::remove_all(dir);
}
