#pragma once

// Scenario files, canonical artifact formatting and the command front end.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmetro/error.hpp"
#include "qmetro/estimation.hpp"
#include "qmetro/metrology.hpp"
#include "qmetro/procedures.hpp"
#include "qmetro/states.hpp"

namespace qmetro {

inline constexpr const char* kScenarioSchema = "metrology-scenario/1";
inline constexpr const char* kNoSensitivity = "no-sensitivity";

// 15 significant digits, '.' separator, no locale.
std::string format_number(double value);
// Sorted keys, no whitespace, numbers via format_number, trailing newline.
std::string canonical_json(const nlohmann::json& value);

enum class OutputType { report, mu_sweep, trial };

struct OutputRequest {
  OutputType type = OutputType::report;
  std::string path;
  std::size_t grid = 101;  // mu_sweep only
};

struct TrialSpec {
  double phi_true = 0.0;
  std::uint64_t shots_per_trial = 1;
  std::size_t n_trials = 1;
  std::uint64_t rng_seed = 0;
  std::string povm = "default";  // default | noon_parity | product_x
  std::pair<double, double> search_interval{0.0, 1.0};
};

struct Scenario {
  std::string name;
  std::optional<ProcedureSpec> procedure;
  StateFamily state;
  double phi = 0.0;
  std::optional<TrialSpec> trial;
  std::vector<OutputRequest> outputs;
};

// ParseError for malformed JSON or wrong shapes, ValidationError for bad values.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

struct Experiment {
  JointGenerator generator;
  PureState probe;
  std::optional<ProcedureSpec> procedure;
};

Experiment realize(const Scenario& scenario);
TrialConfig make_trial_config(const Scenario& scenario, const Experiment& experiment);

nlohmann::json report_to_json(const ResourceReport& report);
nlohmann::json trial_to_json(const TrialResult& result, const TrialConfig& config);
std::string mu_sweep_csv(const std::vector<MuSweepRow>& rows);

// Artifact contents keyed by output path, computed without touching disk.
std::vector<std::pair<std::string, std::string>> scenario_artifacts(const Scenario& scenario,
                                                                    bool only_trials = false,
                                                                    bool parallel = false);

struct CompareKind {
  ProcedureKind kind = ProcedureKind::linear;
  std::size_t body_order = 1;
  std::size_t repetitions = 1;
  std::string label;
};

// "linear", "kbody:K", "exponential", "sequential:T" (over linear).
std::vector<CompareKind> parse_compare_kinds(const std::string& list);
std::vector<std::size_t> parse_size_list(const std::string& list);

std::string compare_procedures_csv(const std::vector<std::size_t>& n_range,
                                   const std::vector<CompareKind>& kinds, double lambda_min,
                                   double lambda_max, std::ostream& diagnostics);

std::string sweep_mu_csv(double seminorm, std::size_t grid);

// Writes every artifact under out_dir; removes already-written files on failure.
void write_artifacts(const std::vector<std::pair<std::string, std::string>>& artifacts,
                     const std::filesystem::path& out_dir);

// One-line machine-readable diagnostic.
std::string error_line(ErrorKind kind, const std::string& message);

}  // namespace qmetro
