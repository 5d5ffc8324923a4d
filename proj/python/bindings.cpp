#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qmetro/cli.hpp"
#include "qmetro/error.hpp"
#include "qmetro/estimation.hpp"
#include "qmetro/metrology.hpp"
#include "qmetro/networks.hpp"
#include "qmetro/opalg.hpp"
#include "qmetro/procedures.hpp"
#include "qmetro/states.hpp"

namespace py = pybind11;
using namespace qmetro;

namespace {

py::object bound_to_py(const Bound& b) {
  if (b.has_sensitivity()) return py::float_(b.value());
  return py::none();
}

py::dict report_to_dict(const ResourceReport& r) {
  py::dict d;
  d["q"] = r.q ? py::object(py::int_(*r.q)) : py::object(py::none());
  d["expectation_raw"] = r.expectation_raw;
  d["expectation_shifted"] = r.expectation_shifted;
  d["stddev"] = r.stddev;
  d["seminorm"] = r.seminorm;
  d["bound_new_hl"] = bound_to_py(r.bound_new_hl);
  d["bound_stddev"] = bound_to_py(r.bound_stddev);
  d["bound_query"] = r.bound_query ? py::object(py::float_(*r.bound_query)) : py::object(py::none());
  d["bound_snl"] = r.bound_snl ? py::object(py::float_(*r.bound_snl)) : py::object(py::none());
  d["qfi"] = r.qfi;
  d["warnings"] = r.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Resource accounting for quantum parameter estimation";

  // Python subclasses mirror the C++ error kinds.
  static py::exception<Error> error(m, "Error");
  static py::exception<ParseError> parse_error(m, "ParseError", error.ptr());
  static py::exception<UsageError> usage_error(m, "UsageError", error.ptr());
  static py::exception<ValidationError> validation_error(m, "ValidationError", error.ptr());
  static py::exception<DomainError> domain_error(m, "DomainError", error.ptr());
  static py::exception<NumericalIntegrityError> numerical_error(m, "NumericalIntegrityError",
                                                                error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::parse: PyErr_SetString(parse_error.ptr(), e.what()); break;
        case ErrorKind::usage: PyErr_SetString(usage_error.ptr(), e.what()); break;
        case ErrorKind::validation: PyErr_SetString(validation_error.ptr(), e.what()); break;
        case ErrorKind::domain: PyErr_SetString(domain_error.ptr(), e.what()); break;
        case ErrorKind::numerical: PyErr_SetString(numerical_error.ptr(), e.what()); break;
      }
    }
  });

  py::class_<HermitianOperator>(m, "HermitianOperator")
      .def(py::init<Matrix, double>(), py::arg("entries"), py::arg("hermitian_tol") = kDefaultHermitianTol)
      .def_static("diagonal", [](const std::vector<double>& v) { return HermitianOperator::diagonal(v); })
      .def_property_readonly("dim", &HermitianOperator::dim)
      .def_property_readonly("matrix", &HermitianOperator::matrix);

  py::class_<PureState>(m, "PureState")
      .def(py::init<Vector, std::vector<std::string>>(), py::arg("amplitudes"),
           py::arg("basis_labels") = std::vector<std::string>{})
      .def_static("normalized", [](Vector v) { return PureState::normalized(std::move(v)); })
      .def_property_readonly("dim", &PureState::dim)
      .def_property_readonly("amplitudes", &PureState::amplitudes)
      .def_property_readonly("basis_labels", &PureState::basis_labels);

  py::class_<Spectrum>(m, "Spectrum")
      .def_readonly("eigenvalues", &Spectrum::eigenvalues)
      .def_readonly("eigenvectors", &Spectrum::eigenvectors);

  m.def("tensor_product",
        py::overload_cast<const HermitianOperator&, const HermitianOperator&>(&tensor_product));
  m.def("tensor_product", py::overload_cast<const PureState&, const PureState&>(&tensor_product));
  m.def("hermitian_eigensystem", &hermitian_eigensystem);
  m.def("evolve", py::overload_cast<const PureState&, const HermitianOperator&, double>(&evolve));
  m.def("moments", [](const PureState& s, const HermitianOperator& a) {
    const Moments mo = moments(s, a);
    return py::make_tuple(mo.expectation, mo.variance);
  });

  py::enum_<ProcedureKind>(m, "ProcedureKind")
      .value("linear", ProcedureKind::linear)
      .value("kbody", ProcedureKind::kbody)
      .value("exponential", ProcedureKind::exponential)
      .value("sequential", ProcedureKind::sequential);

  py::class_<ProcedureSpec>(m, "ProcedureSpec")
      .def(py::init([](ProcedureKind kind, std::size_t n, std::size_t k, std::size_t t,
                       ProcedureKind inner, double lmin, double lmax) {
             ProcedureSpec s;
             s.kind = kind;
             s.n_systems = n;
             s.body_order = k;
             s.repetitions = t;
             s.inner_kind = inner;
             s.lambda_min = lmin;
             s.lambda_max = lmax;
             s.validate();
             return s;
           }),
           py::arg("kind"), py::arg("n_systems"), py::arg("body_order") = 1,
           py::arg("repetitions") = 1, py::arg("inner_kind") = ProcedureKind::linear,
           py::arg("lambda_min") = 0.0, py::arg("lambda_max") = 1.0)
      .def_readonly("kind", &ProcedureSpec::kind)
      .def_readonly("n_systems", &ProcedureSpec::n_systems);

  py::class_<JointGenerator>(m, "JointGenerator")
      .def_property_readonly("generator", &JointGenerator::generator)
      .def_property_readonly("query_complexity", &JointGenerator::query_complexity)
      .def_property_readonly("h_min", &JointGenerator::h_min)
      .def_property_readonly("h_max", &JointGenerator::h_max)
      .def_property_readonly("seminorm", &JointGenerator::seminorm);

  m.def("build_generator", [](const ProcedureSpec& s) { return build_generator(s); });
  m.def("sequential_wrap", &sequential_wrap);
  m.def("closed_form_extremes", [](const ProcedureSpec& s) {
    const Extremes e = closed_form_extremes(s);
    return py::make_tuple(e.q, e.h_min, e.h_max);
  });
  m.def("snl_baseline", [](const ProcedureSpec& s) {
    const SnlBaseline b = snl_baseline(s);
    return py::make_tuple(b.delta_h_separable, b.snl_bound);
  });

  m.def("optimal_state", &optimal_state, py::arg("gen"), py::arg("mu"), py::arg("rel_phase") = 0.0);
  m.def("noon_state", &noon_state);
  m.def("coherent_state", [](Complex alpha, std::size_t cutoff) { return coherent_state(alpha, cutoff).state; });
  m.def("number_operator", &number_operator);
  m.def("mode_number_operator", &mode_number_operator);

  m.def("query_bound", &query_bound);
  m.def("heisenberg_bound_expectation",
        [](double x) { return bound_to_py(heisenberg_bound_expectation(x)); });
  m.def("heisenberg_bound_stddev", [](double x) { return bound_to_py(heisenberg_bound_stddev(x)); });
  m.def("qfi_pure", &qfi_pure);
  m.def("build_report", [](const PureState& s, const JointGenerator& g, std::optional<ProcedureSpec> spec) {
    return report_to_dict(build_report(s, g, spec));
  }, py::arg("state"), py::arg("gen"), py::arg("spec") = std::nullopt);
  m.def("mu_sweep", [](const JointGenerator& g, const std::vector<double>& grid) {
    py::list rows;
    for (const auto& r : mu_sweep(g, grid)) rows.append(py::make_tuple(r.mu, r.shifted_expectation, r.stddev));
    return rows;
  });

  m.def("noon_povm", &noon_povm);
  m.def("default_povm", &default_povm);
  m.def("precision_trial", [](const JointGenerator& gen, const PureState& state, double phi_true,
                              std::uint64_t shots, std::size_t n_trials, std::uint64_t seed,
                              const Povm& povm, std::pair<double, double> interval) {
    TrialConfig c;
    c.phi_true = phi_true;
    c.shots_per_trial = shots;
    c.n_trials = n_trials;
    c.rng_seed = seed;
    c.povm = povm;
    c.search_interval = interval;
    const TrialResult r = precision_trial(gen, state, c);
    py::dict d;
    d["estimates"] = r.estimates;
    d["empirical_rmse"] = r.empirical_rmse;
    d["predicted_crb"] = r.predicted_crb;
    d["rng_algorithm"] = r.rng_algorithm;
    return d;
  });

  m.def("run_scenario_text", [](const std::string& text) {
    py::dict out;
    for (const auto& [path, content] : scenario_artifacts(parse_scenario(text))) out[py::str(path)] = content;
    return out;
  }, "Parse a scenario and return {output path: artifact content} without writing files.");
}
