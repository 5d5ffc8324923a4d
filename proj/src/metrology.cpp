#include "qmetro/metrology.hpp"

#include <cmath>
#include <sstream>

#include "qmetro/error.hpp"
#include "qmetro/states.hpp"

namespace qmetro {

double Bound::value() const {
  if (!value_) throw DomainError("bound: no sensitivity (vanishing resource)");
  return *value_;
}

double resource_count_shifted(const PureState& state, const JointGenerator& gen) {
  const double shifted = moments(state, gen.generator()).expectation - gen.h_min();
  const double scale = std::max(1.0, std::abs(gen.h_min()));
  if (shifted < -1e-10 * scale) {
    std::ostringstream msg;
    msg << "resource_count_shifted: expectation lies " << -shifted << " below the ground energy";
    throw NumericalIntegrityError(msg.str());
  }
  return std::max(0.0, shifted);
}

Bound heisenberg_bound_expectation(double shifted_expectation) {
  if (!std::isfinite(shifted_expectation) || shifted_expectation < -kZeroResourceTol) {
    throw DomainError("heisenberg_bound_expectation: resource must be finite and non-negative");
  }
  if (shifted_expectation <= kZeroResourceTol) return Bound::no_sensitivity();
  return Bound::finite(1.0 / (2.0 * shifted_expectation));
}

Bound heisenberg_bound_stddev(double stddev) {
  if (!std::isfinite(stddev) || stddev < -kZeroResourceTol) {
    throw DomainError("heisenberg_bound_stddev: stddev must be finite and non-negative");
  }
  if (stddev <= kZeroResourceTol) return Bound::no_sensitivity();
  return Bound::finite(1.0 / (2.0 * stddev));
}

double query_bound(std::uint64_t q, double lambda_min, double lambda_max, std::size_t k) {
  if (q < 1) throw UsageError("query_bound: q must be >= 1");
  if (k < 1) throw UsageError("query_bound: k must be >= 1");
  const double gap = std::pow(lambda_max, static_cast<double>(k)) -
                     std::pow(lambda_min, static_cast<double>(k));
  if (!(gap > 0.0)) {
    std::ostringstream msg;
    msg << "query_bound: lambda_max^" << k << " - lambda_min^" << k << " = " << gap
        << " is not positive";
    throw DomainError(msg.str());
  }
  return 1.0 / (gap * static_cast<double>(q));
}

double qfi_pure(const PureState& state, const HermitianOperator& gen) {
  return 4.0 * moments(state, gen).variance;
}

void validate_povm(const Povm& povm, double tol) {
  if (povm.empty()) throw PovmError("povm: no elements");
  const std::size_t dim = povm.front().dim();
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < povm.size(); ++i) {
    if (povm[i].dim() != dim) throw PovmError("povm: elements differ in dimension");
    if (hermitian_eigensystem(povm[i]).min() < -tol) {
      std::ostringstream msg;
      msg << "povm: element " << i << " is not positive semidefinite";
      throw PovmError(msg.str());
    }
    sum += povm[i].matrix();
  }
  const double defect =
      (sum - Matrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff();
  if (defect > tol) {
    std::ostringstream msg;
    msg << "povm: elements sum to identity only within " << defect;
    throw PovmError(msg.str());
  }
}

std::vector<double> born_probabilities(const PureState& state, const Povm& povm) {
  std::vector<double> p;
  p.reserve(povm.size());
  for (const auto& e : povm) {
    if (e.dim() != state.dim()) throw UsageError("born_probabilities: dimension mismatch");
    p.push_back(state.amplitudes().dot(e.matrix() * state.amplitudes()).real());
  }
  return p;
}

namespace {

template <typename F>
auto central_difference(F&& f, double phi, const DerivativeOptions& options) {
  if (!(options.eps > 0.0)) throw UsageError("derivative step must be positive");
  auto diff = [&](double h) {
    auto plus = f(phi + h);
    auto minus = f(phi - h);
    for (std::size_t i = 0; i < plus.size(); ++i) plus[i] = (plus[i] - minus[i]) / (2.0 * h);
    return plus;
  };
  auto d = diff(options.eps);
  if (options.richardson) {
    const auto half = diff(0.5 * options.eps);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (4.0 * half[i] - d[i]) / 3.0;
  }
  return d;
}

}  // namespace

double classical_fisher(const Povm& povm, const StateAt& state_at, double phi,
                        const DerivativeOptions& options) {
  validate_povm(povm);
  const auto p = born_probabilities(state_at(phi), povm);
  const auto dp = central_difference(
      [&](double x) { return born_probabilities(state_at(x), povm); }, phi, options);
  double fisher = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] < kProbabilityFloor) continue;
    fisher += dp[x] * dp[x] / p[x];
  }
  return fisher;
}

double error_propagation(const HermitianOperator& observable, const StateAt& state_at, double phi,
                         const DerivativeOptions& options) {
  const Moments m = moments(state_at(phi), observable);
  const auto slope = central_difference(
      [&](double x) { return std::vector<double>{moments(state_at(x), observable).expectation}; },
      phi, options)[0];
  if (std::abs(slope) <= 1e-12) {
    std::ostringstream msg;
    msg << "error_propagation: d<X>/dphi vanishes at phi = " << phi
        << "; choose a different working point";
    throw StationaryPointError(msg.str());
  }
  return std::sqrt(m.variance) / std::abs(slope);
}

std::vector<MuSweepRow> mu_sweep(const JointGenerator& gen, const std::vector<double>& grid) {
  std::vector<MuSweepRow> rows;
  rows.reserve(grid.size());
  for (double mu : grid) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw ValidationError("mu_sweep: grid values must lie in [0, 1]");
    const PureState psi = optimal_state(gen, mu);
    const Moments m = moments(psi, gen.generator());
    rows.push_back({mu, std::max(0.0, m.expectation - gen.h_min()), std::sqrt(m.variance)});
  }
  return rows;
}

std::vector<double> uniform_mu_grid(std::size_t points) {
  if (points < 2) throw ValidationError("mu grid needs at least 2 points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

ResourceReport build_report(const PureState& state, const JointGenerator& gen,
                            const std::optional<ProcedureSpec>& spec) {
  if (state.dim() != gen.dim()) throw UsageError("build_report: state and generator dimensions differ");
  const Moments m = moments(state, gen.generator());

  ResourceReport r;
  r.q = gen.query_complexity();
  r.expectation_raw = m.expectation;
  r.expectation_shifted = resource_count_shifted(state, gen);
  r.stddev = std::sqrt(m.variance);
  r.seminorm = gen.seminorm();
  r.bound_new_hl = heisenberg_bound_expectation(r.expectation_shifted);
  r.bound_stddev = heisenberg_bound_stddev(r.stddev);
  if (r.q && *r.q >= 1 && gen.query_constant()) {
    r.bound_query = *gen.query_constant() / static_cast<double>(*r.q);
  }
  r.qfi = 4.0 * m.variance;
  r.warnings = gen.warnings();

  if (spec && spec->kind == ProcedureKind::linear) {
    r.bound_snl = snl_baseline(*spec).snl_bound;
    if (std::abs(spec->lambda_max - spec->lambda_min - 1.0) <= 1e-12) {
      r.bound_n_systems = 1.0 / static_cast<double>(spec->n_systems);
    }
  }
  return r;
}

Moments weight_moments(const WeightSpectrum& spectrum, const std::vector<double>& weights) {
  const auto& v = spectrum.value_by_weight;
  if (weights.size() != v.size()) throw UsageError("weight_moments: size mismatch");
  double total = 0.0, mean = 0.0;
  for (std::size_t w = 0; w < v.size(); ++w) {
    total += weights[w];
    mean += weights[w] * v[w];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("weight_moments: weights do not sum to 1");
  double var = 0.0;
  for (std::size_t w = 0; w < v.size(); ++w) var += weights[w] * (v[w] - mean) * (v[w] - mean);
  return Moments{mean, var};
}

}  // namespace qmetro
