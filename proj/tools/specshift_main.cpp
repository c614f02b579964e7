// Command line front end: run one experiment spec, run a suite directory,
// generate spec files, or dump a shift function as CSV.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "specshift/specshift.hpp"

namespace fs = std::filesystem;
using namespace specshift;

namespace {

std::string checks_csv(const Report& r) {
  std::string out = "name,value,tolerance,pass\n";
  for (const CheckRecord& c : r.checks)
    out += c.name + "," + detail::format_real(c.value) + "," +
           detail::format_real(c.tolerance) + "," + (c.pass ? "1" : "0") +
           "\n";
  return out;
}

std::string suite_csv(const SuiteResult& sr) {
  std::string out = "name,experiment,pass\n";
  for (const SuiteEntry& e : sr.entries)
    out += e.name + "," + e.report.experiment + "," +
           (e.report.pass() ? "1" : "0") + "\n";
  return out;
}

void write_report_files(const Report& rep, const fs::path& out_dir,
                        const std::string& stem, bool with_csv) {
  fs::create_directories(out_dir);
  write_text_atomic(out_dir / (stem + "_report.json"),
                    canonical_json(rep.to_json()));
  if (with_csv) {
    write_text_atomic(out_dir / (stem + "_checks.csv"), checks_csv(rep));
    for (const auto& [suffix, content] : rep.artifacts)
      write_text_atomic(out_dir / (stem + "_" + suffix), content);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite dimensional spectral shift function experiments"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string suite_dir;
  std::string out_dir;
  std::string format = "json";
  double tol = 0.0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--tol", tol, "override params.tol in the spec");
    cmd->add_option("--out-dir", out_dir,
                    "directory for reports and artifacts");
    cmd->add_option("--format", format, "primary output format")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* run_cmd = app.add_subcommand("run", "execute one spec file");
  run_cmd->add_option("spec", spec_path, "experiment spec (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(run_cmd);

  CLI::App* suite_cmd =
      app.add_subcommand("suite", "execute every spec in a directory");
  suite_cmd->add_option("dir", suite_dir, "directory of *.json specs")
      ->required()
      ->check(CLI::ExistingDirectory);
  add_common(suite_cmd);

  uint64_t seed = 0;
  int dim = 4;
  double scale = 1.0;
  std::string kind = "linear";
  std::string experiment = "xi";
  std::string gen_out;
  CLI::App* gen_cmd = app.add_subcommand("gen", "emit a canonical spec file");
  gen_cmd->add_option("--seed", seed, "generator seed")->required();
  gen_cmd->add_option("--dim", dim, "ambient dimension")
      ->check(CLI::Range(1, 64));
  gen_cmd->add_option("--kind", kind, "coupling family kind")
      ->check(CLI::IsMember(
          {"linear", "quadratic_concave", "matrix_polynomial"}));
  gen_cmd->add_option("--experiment", experiment, "experiment to run")
      ->check(CLI::IsMember(experiment_names()));
  gen_cmd->add_option("--scale", scale, "perturbation size")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--out", gen_out, "write here instead of stdout");

  std::string h0_path, v_path, xi_out;
  CLI::App* xi_cmd =
      app.add_subcommand("xi", "shift function of an explicit pair");
  xi_cmd->add_option("--h0", h0_path, "base operator (matrix JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  xi_cmd->add_option("--v", v_path, "perturbation (matrix JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  xi_cmd->add_option("--out", xi_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      InstanceSpec spec = parse_instance_spec(load_json_file(spec_path));
      if (run_cmd->count("--tol") > 0) {
        spec.params["tol"] = tol;
        spec.raw["params"]["tol"] = tol;
      }
      const Report rep = run(spec);
      std::cout << (format == "csv" ? checks_csv(rep)
                                    : canonical_json(rep.to_json()));
      if (!out_dir.empty())
        write_report_files(rep, out_dir, fs::path(spec_path).stem().string(),
                           format == "csv");
      return rep.pass() ? 0 : 1;
    }
    if (*suite_cmd) {
      std::optional<double> tol_override;
      if (suite_cmd->count("--tol") > 0) tol_override = tol;
      const SuiteResult sr = run_suite(suite_dir, tol_override);
      std::cout << (format == "csv" ? suite_csv(sr)
                                    : canonical_json(sr.to_json()));
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_atomic(fs::path(out_dir) / "suite_summary.json",
                          canonical_json(sr.to_json()));
        for (const SuiteEntry& e : sr.entries)
          write_report_files(e.report, out_dir, e.name, format == "csv");
      }
      return sr.pass() ? 0 : 1;
    }
    if (*gen_cmd) {
      InstanceSpec spec;
      spec.seed = seed;
      spec.dim = dim;
      spec.family_kind = family_kind_from_string(kind);
      spec.scale = scale;
      spec.experiment = experiment;
      const std::string text = canonical_json(instance_spec_to_json(spec));
      if (gen_out.empty())
        std::cout << text;
      else
        write_text_atomic(gen_out, text);
      return 0;
    }
    if (*xi_cmd) {
      const HermitianOperator h0(
          matrix_from_json(load_json_file(h0_path), "h0"));
      const HermitianOperator v(matrix_from_json(load_json_file(v_path), "v"));
      const ShiftResult sr = shift_function(h0, v);
      write_text_atomic(xi_out, step_function_to_csv(sr.xi));
      std::cout << canonical_json(Json{{"v_trace", sr.v_trace},
                                       {"xi_l1", sr.xi_l1},
                                       {"xi_integral", sr.xi.integral()}});
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
