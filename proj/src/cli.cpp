#include "qmetro/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

namespace qmetro {

using nlohmann::json;

std::string format_number(double value) {
  if (!std::isfinite(value)) throw NumericalIntegrityError("format_number: non-finite value");
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 15);
  return std::string(buf, res.ptr);
}

namespace {

void dump(const json& v, std::string& out) {
  switch (v.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        dump(v[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: out += format_number(v.get<double>()); break;
    default: out += v.dump(); break;
  }
}

template <typename T>
T get_field(const json& obj, const char* key, const char* where) {
  if (!obj.contains(key)) {
    throw ParseError(std::string(where) + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const char* where) {
  return obj.contains(key) ? get_field<T>(obj, key, where) : fallback;
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback, const char* where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ParseError(std::string(where) + ": field '" + key + "' must be an integer");
  }
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  const auto s = v.get<std::int64_t>();
  if (s < 0) throw ValidationError(std::string(where) + ": field '" + key + "' must be >= 0");
  return static_cast<std::size_t>(s);
}

void require_object(const json& v, const char* where) {
  if (!v.is_object()) throw ParseError(std::string(where) + ": expected a JSON object");
}

ProcedureSpec parse_procedure(const json& j) {
  require_object(j, "procedure");
  ProcedureSpec spec;
  spec.kind = procedure_kind_from_string(get_field<std::string>(j, "kind", "procedure"));
  spec.n_systems = get_count(j, "n_systems", 0, "procedure");
  if (!j.contains("n_systems")) throw ParseError("procedure: missing field 'n_systems'");
  spec.body_order = get_count(j, "body_order", 1, "procedure");
  spec.repetitions = get_count(j, "repetitions", 1, "procedure");
  spec.inner_kind = procedure_kind_from_string(get_or<std::string>(j, "inner_kind", "linear", "procedure"));
  spec.lambda_min = get_or<double>(j, "lambda_min", 0.0, "procedure");
  spec.lambda_max = get_or<double>(j, "lambda_max", 1.0, "procedure");
  spec.subsystem_dim = get_count(j, "subsystem_dim", 2, "procedure");
  spec.include_self_pairs = get_or<bool>(j, "include_self_pairs", false, "procedure");
  spec.validate_for_construction();
  return spec;
}

StateFamily parse_state(const json& j) {
  require_object(j, "state");
  StateFamily s;
  s.kind = state_kind_from_string(get_field<std::string>(j, "kind", "state"));
  s.mu = get_or<double>(j, "mu", 0.5, "state");
  s.rel_phase = get_or<double>(j, "rel_phase", 0.0, "state");
  s.n_photons = get_count(j, "n_photons", 1, "state");
  s.cutoff = get_count(j, "cutoff", 1, "state");
  if (j.contains("alpha")) {
    const auto a = get_field<std::vector<double>>(j, "alpha", "state");
    if (a.size() != 2) throw ParseError("state: 'alpha' must be [re, im]");
    s.alpha = Complex(a[0], a[1]);
  }
  s.validate();
  return s;
}

TrialSpec parse_trial(const json& j) {
  require_object(j, "trial");
  TrialSpec t;
  t.phi_true = get_field<double>(j, "phi_true", "trial");
  t.shots_per_trial = get_count(j, "shots_per_trial", 0, "trial");
  t.n_trials = get_count(j, "n_trials", 0, "trial");
  if (!j.contains("rng_seed")) throw ParseError("trial: missing field 'rng_seed' (no implicit seeding)");
  t.rng_seed = get_count(j, "rng_seed", 0, "trial");
  t.povm = get_or<std::string>(j, "povm", "default", "trial");
  const auto interval = get_field<std::vector<double>>(j, "search_interval", "trial");
  if (interval.size() != 2) throw ParseError("trial: 'search_interval' must be [lo, hi]");
  t.search_interval = {interval[0], interval[1]};

  if (t.shots_per_trial < 1) throw ValidationError("trial: shots_per_trial must be >= 1");
  if (t.n_trials < 1) throw ValidationError("trial: n_trials must be >= 1");
  if (t.povm != "default" && t.povm != "noon_parity" && t.povm != "product_x") {
    throw ValidationError("trial: unknown povm '" + t.povm + "'");
  }
  if (!(t.search_interval.first < t.phi_true && t.phi_true < t.search_interval.second)) {
    throw ValidationError("trial: search_interval must strictly contain phi_true");
  }
  return t;
}

OutputRequest parse_output(const json& j) {
  require_object(j, "output");
  OutputRequest o;
  const auto type = get_field<std::string>(j, "type", "output");
  if (type == "report") {
    o.type = OutputType::report;
  } else if (type == "mu_sweep") {
    o.type = OutputType::mu_sweep;
  } else if (type == "trial") {
    o.type = OutputType::trial;
  } else {
    throw ValidationError("output: unknown type '" + type + "'");
  }
  o.path = get_field<std::string>(j, "path", "output");
  if (o.path.empty()) throw ValidationError("output: empty path");
  const std::filesystem::path rel(o.path);
  if (rel.is_absolute() || rel.has_root_name()) {
    throw ValidationError("output: path '" + o.path + "' must be relative to --out-dir");
  }
  for (const auto& part : rel) {
    if (part == "..") throw ValidationError("output: path '" + o.path + "' must not contain '..'");
  }
  o.grid = get_count(j, "grid", 101, "output");
  if (o.grid < 2) throw ValidationError("output: mu_sweep grid needs at least 2 points");
  return o;
}

json bound_json(const Bound& b) {
  if (b.has_sensitivity()) return b.value();
  return kNoSensitivity;
}

std::string csv_header_and_rows(const std::vector<MuSweepRow>& rows) {
  std::string out = "mu,shifted_expectation,stddev\n";
  for (const auto& r : rows) {
    out += format_number(r.mu) + ',' + format_number(r.shifted_expectation) + ',' +
           format_number(r.stddev) + '\n';
  }
  return out;
}

}  // namespace

std::string canonical_json(const json& value) {
  std::string out;
  dump(value, out);
  out += '\n';
  return out;
}

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: malformed JSON: ") + e.what());
  }
  require_object(j, "scenario");
  const auto schema = get_field<std::string>(j, "schema", "scenario");
  if (schema != kScenarioSchema) {
    throw ParseError("scenario: unsupported schema '" + schema + "', expected " + kScenarioSchema);
  }
  Scenario s;
  s.name = get_field<std::string>(j, "name", "scenario");
  if (j.contains("procedure")) s.procedure = parse_procedure(j.at("procedure"));
  if (!j.contains("state")) throw ParseError("scenario: missing field 'state'");
  s.state = parse_state(j.at("state"));
  s.phi = get_or<double>(j, "phi", 0.0, "scenario");
  if (!std::isfinite(s.phi)) throw ValidationError("scenario: phi must be finite");
  if (j.contains("trial")) s.trial = parse_trial(j.at("trial"));
  if (j.contains("outputs")) {
    if (!j.at("outputs").is_array()) throw ParseError("scenario: 'outputs' must be an array");
    for (const auto& o : j.at("outputs")) s.outputs.push_back(parse_output(o));
  }

  const bool needs_procedure =
      s.state.kind == StateKind::optimal_mu || s.state.kind == StateKind::product_balanced;
  if (needs_procedure && !s.procedure) {
    throw ValidationError(std::string("scenario: state kind ") + to_string(s.state.kind) +
                          " requires a procedure");
  }
  if (s.state.kind == StateKind::product_balanced && s.procedure &&
      s.procedure->base_operator == std::nullopt && s.procedure->subsystem_dim < 2) {
    throw ValidationError("scenario: product_balanced needs subsystem_dim >= 2");
  }
  for (const auto& o : s.outputs) {
    if (o.type == OutputType::trial && !s.trial) {
      throw ValidationError("scenario: trial output requested without a trial block");
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("scenario: cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

Experiment realize(const Scenario& scenario) {
  const StateFamily& st = scenario.state;
  switch (st.kind) {
    case StateKind::optimal_mu: {
      JointGenerator gen = build_generator(*scenario.procedure);
      PureState probe = optimal_state(gen, st.mu, st.rel_phase);
      return Experiment{std::move(gen), std::move(probe), scenario.procedure};
    }
    case StateKind::product_balanced: {
      JointGenerator gen = build_generator(*scenario.procedure);
      const Spectrum base = hermitian_eigensystem(base_generator(*scenario.procedure));
      PureState probe = product_balanced_state(scenario.procedure->n_systems, base);
      return Experiment{std::move(gen), std::move(probe), scenario.procedure};
    }
    case StateKind::noon: {
      // Each photon passing the phase shifter is one query of a unit-gap box.
      JointGenerator gen(mode_number_operator(st.n_photons, 0), st.n_photons, 1.0);
      return Experiment{std::move(gen), noon_state(st.n_photons), std::nullopt};
    }
    case StateKind::coherent: {
      JointGenerator gen(number_operator(st.cutoff), std::nullopt);
      return Experiment{std::move(gen), coherent_state(st.alpha, st.cutoff).state, std::nullopt};
    }
  }
  throw ValidationError("scenario: unsupported state kind");
}

TrialConfig make_trial_config(const Scenario& scenario, const Experiment& experiment) {
  if (!scenario.trial) throw ValidationError("scenario: no trial block");
  const TrialSpec& t = *scenario.trial;
  TrialConfig c;
  c.phi_true = t.phi_true;
  c.shots_per_trial = t.shots_per_trial;
  c.n_trials = t.n_trials;
  c.rng_seed = t.rng_seed;
  c.search_interval = t.search_interval;
  if (t.povm == "noon_parity") {
    if (scenario.state.kind != StateKind::noon) {
      throw ValidationError("trial: noon_parity povm requires a noon state");
    }
    c.povm = noon_povm(scenario.state.n_photons);
  } else if (t.povm == "product_x") {
    if (!scenario.procedure) throw ValidationError("trial: product_x povm requires a procedure");
    const Spectrum base = hermitian_eigensystem(base_generator(*scenario.procedure));
    const auto top = static_cast<Eigen::Index>(max_eigenvector_column(base));
    c.povm = product_povm(extreme_pair_povm(base.eigenvectors.col(top), base.eigenvectors.col(0)),
                          scenario.procedure->n_systems);
  } else {
    c.povm = default_povm(experiment.generator);
  }
  c.validate(experiment.generator);
  return c;
}

json report_to_json(const ResourceReport& r) {
  json j = json::object();
  if (r.q) j["q"] = *r.q;
  j["expectation_raw"] = r.expectation_raw;
  j["expectation_shifted"] = r.expectation_shifted;
  j["stddev"] = r.stddev;
  j["seminorm"] = r.seminorm;
  j["bound_new_hl"] = bound_json(r.bound_new_hl);
  j["bound_stddev"] = bound_json(r.bound_stddev);
  if (r.bound_query) j["bound_query"] = *r.bound_query;
  if (r.bound_snl) j["bound_snl"] = *r.bound_snl;
  if (r.bound_n_systems) j["bound_n_systems"] = *r.bound_n_systems;
  j["qfi"] = r.qfi;
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

json trial_to_json(const TrialResult& result, const TrialConfig& config) {
  json j = json::object();
  j["phi_true"] = config.phi_true;
  j["shots_per_trial"] = config.shots_per_trial;
  j["n_trials"] = config.n_trials;
  j["rng_seed"] = config.rng_seed;
  j["rng_algorithm"] = result.rng_algorithm;
  j["search_interval"] = {config.search_interval.first, config.search_interval.second};
  j["empirical_rmse"] = result.empirical_rmse;
  j["predicted_crb"] = result.predicted_crb;
  j["rmse_over_crb"] = result.empirical_rmse / result.predicted_crb;
  j["boundary_warnings"] = result.boundary_warnings;
  j["estimates"] = result.estimates;
  return j;
}

std::string mu_sweep_csv(const std::vector<MuSweepRow>& rows) { return csv_header_and_rows(rows); }

std::vector<std::pair<std::string, std::string>> scenario_artifacts(const Scenario& scenario,
                                                                    bool only_trials,
                                                                    bool parallel) {
  const Experiment exp = realize(scenario);
  auto produce = [&](const OutputRequest& o) -> std::string {
    switch (o.type) {
      case OutputType::report: {
        const PureState at_phi = evolve(exp.probe, exp.generator.spectrum(), scenario.phi);
        json j = report_to_json(build_report(at_phi, exp.generator, exp.procedure));
        j["scenario"] = scenario.name;
        j["phi"] = scenario.phi;
        return canonical_json(j);
      }
      case OutputType::mu_sweep:
        return mu_sweep_csv(mu_sweep(exp.generator, uniform_mu_grid(o.grid)));
      case OutputType::trial: {
        const TrialConfig config = make_trial_config(scenario, exp);
        json j = trial_to_json(precision_trial(exp.generator, exp.probe, config), config);
        j["scenario"] = scenario.name;
        return canonical_json(j);
      }
    }
    return {};
  };

  std::vector<const OutputRequest*> selected;
  for (const auto& o : scenario.outputs) {
    if (!only_trials || o.type == OutputType::trial) selected.push_back(&o);
  }
  std::vector<std::pair<std::string, std::string>> artifacts;
  if (parallel) {
    std::vector<std::future<std::string>> jobs;
    for (const auto* o : selected) jobs.push_back(std::async(std::launch::async, produce, std::cref(*o)));
    for (std::size_t i = 0; i < selected.size(); ++i) artifacts.emplace_back(selected[i]->path, jobs[i].get());
  } else {
    for (const auto* o : selected) artifacts.emplace_back(o->path, produce(*o));
  }
  return artifacts;
}

std::vector<CompareKind> parse_compare_kinds(const std::string& list) {
  std::vector<CompareKind> kinds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    CompareKind k;
    k.label = item;
    const auto colon = item.find(':');
    const std::string name = item.substr(0, colon);
    k.kind = procedure_kind_from_string(name);
    std::size_t param = 0;
    if (colon != std::string::npos) {
      const std::string arg = item.substr(colon + 1);
      const auto res = std::from_chars(arg.data(), arg.data() + arg.size(), param);
      if (res.ec != std::errc{} || res.ptr != arg.data() + arg.size() || param < 1) {
        throw ValidationError("compare: bad parameter in kind '" + item + "'");
      }
    }
    if (k.kind == ProcedureKind::kbody) {
      if (param == 0) throw ValidationError("compare: kbody needs an order, e.g. kbody:2");
      k.body_order = param;
    } else if (k.kind == ProcedureKind::sequential) {
      if (param == 0) throw ValidationError("compare: sequential needs repetitions, e.g. sequential:3");
      k.repetitions = param;
    } else if (param != 0) {
      throw ValidationError("compare: kind '" + name + "' takes no parameter");
    }
    kinds.push_back(k);
  }
  return kinds;
}

std::vector<std::size_t> parse_size_list(const std::string& list) {
  std::vector<std::size_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc{} || res.ptr != item.data() + item.size() || v < 1) {
      throw ValidationError("bad positive integer '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string compare_procedures_csv(const std::vector<std::size_t>& n_range,
                                   const std::vector<CompareKind>& kinds, double lambda_min,
                                   double lambda_max, std::ostream& diagnostics) {
  std::string out = "kind,N,Q,seminorm,bound_query,bound_snl\n";
  for (const auto& k : kinds) {
    for (auto n : n_range) {
      ProcedureSpec spec;
      spec.kind = k.kind;
      spec.n_systems = n;
      spec.body_order = k.body_order;
      spec.repetitions = k.repetitions;
      spec.lambda_min = lambda_min;
      spec.lambda_max = lambda_max;
      try {
        if (spec.effective_kind() == ProcedureKind::exponential && n > kMaxExponentialSystems) {
          std::ostringstream msg;
          msg << "exponential kind capped at N <= " << kMaxExponentialSystems;
          throw ValidationError(msg.str());
        }
        const Extremes e = closed_form_extremes(spec);
        const double bound = query_constant(spec) / static_cast<double>(e.q);
        std::string snl;
        if (spec.kind == ProcedureKind::linear) snl = format_number(snl_baseline(spec).snl_bound);
        out += k.label + ',' + std::to_string(n) + ',' + std::to_string(e.q) + ',' +
               format_number(e.h_max - e.h_min) + ',' + format_number(bound) + ',' + snl + '\n';
      } catch (const Error& err) {
        diagnostics << error_line(err.kind(), "compare: skipped " + k.label + " N=" +
                                                  std::to_string(n) + ": " + err.what())
                    << '\n';
      }
    }
  }
  return out;
}

std::string sweep_mu_csv(double seminorm, std::size_t grid) {
  if (!(seminorm > 0.0) || !std::isfinite(seminorm)) {
    throw ValidationError("sweep-mu: seminorm must be positive");
  }
  const std::vector<double> levels{0.0, seminorm};
  const JointGenerator gen(HermitianOperator::diagonal(levels), std::nullopt);
  return mu_sweep_csv(mu_sweep(gen, uniform_mu_grid(grid)));
}

void write_artifacts(const std::vector<std::pair<std::string, std::string>>& artifacts,
                     const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  try {
    for (const auto& [rel, content] : artifacts) {
      const std::filesystem::path target = out_dir / rel;
      if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
      std::ofstream out(target, std::ios::binary | std::ios::trunc);
      if (!out) throw ValidationError("cannot write artifact " + target.string());
      written.push_back(target);
      out << content;
      out.close();
      if (!out) throw ValidationError("failed writing artifact " + target.string());
    }
  } catch (const std::filesystem::filesystem_error& e) {
    for (const auto& p : written) std::filesystem::remove(p);
    throw ValidationError(std::string("artifact output: ") + e.what());
  } catch (...) {
    for (const auto& p : written) std::filesystem::remove(p);
    throw;
  }
}

std::string error_line(ErrorKind kind, const std::string& message) {
  json j = json::object();
  j["error"] = to_string(kind);
  j["exit_code"] = exit_code(kind);
  j["message"] = message;
  std::string line = canonical_json(j);
  line.pop_back();
  return line;
}

}  // namespace qmetro
