// qmetro: resource reports, procedure comparisons, mu sweeps and Monte-Carlo
// phase estimation from declarative scenario files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qmetro/cli.hpp"

namespace {

int fail(qmetro::ErrorKind kind, const std::string& message) {
  std::cerr << qmetro::error_line(kind, message) << '\n';
  return qmetro::exit_code(kind);
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    return;
  }
  const std::filesystem::path target(out_path);
  qmetro::write_artifacts({{target.filename().string(), content}},
                          target.has_parent_path() ? target.parent_path() : ".");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-complexity and Heisenberg-limit resource accounting"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = ".";
  bool parallel = false;
  auto* run = app.add_subcommand("run", "Produce every artifact listed in a scenario file");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out-dir", out_dir, "Directory that output paths are relative to");
  run->add_flag("--parallel", parallel, "Compute independent outputs concurrently");

  auto* estimate = app.add_subcommand("estimate", "Run only the Monte-Carlo trial outputs");
  estimate->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  estimate->add_option("--out-dir", out_dir, "Directory that output paths are relative to");

  std::string kinds_list;
  std::string n_list;
  double lambda_min = 0.0;
  double lambda_max = 1.0;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Tabulate Q, semi-norm and bounds per procedure");
  compare->add_option("--kinds", kinds_list, "Comma list: linear,kbody:K,exponential,sequential:T");
  compare->add_option("--n", n_list, "Comma list of system counts")->required();
  compare->add_option("--lambda-min", lambda_min, "Smallest base eigenvalue");
  compare->add_option("--lambda-max", lambda_max, "Largest base eigenvalue");
  compare->add_option("--out", compare_out, "CSV path (stdout when omitted)");

  double seminorm = 1.0;
  std::size_t grid = 101;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep-mu", "Shifted expectation and stddev versus mu");
  sweep->add_option("--seminorm", seminorm, "Spectral width h_max - h_min");
  sweep->add_option("--grid", grid, "Number of mu points on [0, 1]");
  sweep->add_option("--out", sweep_out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(qmetro::ErrorKind::parse, e.what());
  }

  try {
    if (*run || *estimate) {
      const qmetro::Scenario scenario = qmetro::load_scenario(scenario_path);
      const auto artifacts = qmetro::scenario_artifacts(scenario, static_cast<bool>(*estimate), parallel);
      qmetro::write_artifacts(artifacts, out_dir);
      for (const auto& [path, content] : artifacts) std::cout << path << '\n';
    } else if (*compare) {
      const auto kinds = qmetro::parse_compare_kinds(kinds_list);
      const auto ns = qmetro::parse_size_list(n_list);
      emit(qmetro::compare_procedures_csv(ns, kinds, lambda_min, lambda_max, std::cerr), compare_out);
    } else if (*sweep) {
      emit(qmetro::sweep_mu_csv(seminorm, grid), sweep_out);
    }
  } catch (const qmetro::Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail(qmetro::ErrorKind::numerical, e.what());
  }
  return 0;
}
