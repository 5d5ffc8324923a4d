#include "qmetro/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "qmetro/error.hpp"
#include "qmetro/states.hpp"

namespace qmetro {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed + (stream + 1) * 0x9E3779B97F4A7C15ULL);
}

namespace {

std::vector<double> checked_distribution(std::vector<double> p) {
  double total = 0.0;
  for (auto& x : p) {
    if (x < -1e-12) {
      std::ostringstream msg;
      msg << "povm: negative outcome probability " << x;
      throw PovmError(msg.str());
    }
    x = std::max(0.0, x);
    total += x;
  }
  if (!(total > 0.0)) throw PovmError("povm: outcome probabilities vanish");
  for (auto& x : p) x /= total;
  return p;
}

Counts sample_from(const std::vector<double>& p, std::uint64_t shots, std::mt19937_64& rng) {
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  cdf.back() = 1.0;
  Counts counts(p.size(), 0);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), p.size() - 1);
    ++counts[idx];
  }
  return counts;
}

}  // namespace

Counts sample_outcomes(const PureState& state, const Povm& povm, std::uint64_t shots,
                       std::uint64_t seed) {
  validate_povm(povm);
  const auto p = checked_distribution(born_probabilities(state, povm));
  std::mt19937_64 rng(stream_seed(seed, 0));
  return sample_from(p, shots, rng);
}

MleResult mle_estimate(const Counts& counts, const ProbabilityModel& model,
                       std::pair<double, double> interval, const MleOptions& options) {
  const auto [lo, hi] = interval;
  if (!(lo < hi)) throw UsageError("mle_estimate: interval must satisfy lo < hi");
  if (options.grid_points < 3) throw UsageError("mle_estimate: grid needs at least 3 points");

  auto log_likelihood = [&](double phi) {
    const auto p = model(phi);
    if (p.size() != counts.size()) throw UsageError("mle_estimate: model/count size mismatch");
    double ll = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (counts[x] == 0) continue;
      ll += static_cast<double>(counts[x]) * std::log(std::max(p[x], kProbabilityFloor));
    }
    return ll;
  };

  const std::size_t n = options.grid_points;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> ll(n);
  for (std::size_t i = 0; i < n; ++i) ll[i] = log_likelihood(i + 1 == n ? hi : lo + step * static_cast<double>(i));
  const double best = *std::max_element(ll.begin(), ll.end());
  const double tie = 1e-12 * std::max(1.0, std::abs(best));
  std::size_t arg = 0;
  while (ll[arg] < best - tie) ++arg;

  double a = lo + step * static_cast<double>(arg == 0 ? 0 : arg - 1);
  double b = std::min(hi, lo + step * static_cast<double>(std::min(arg + 1, n - 1)));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = log_likelihood(c);
  double fd = log_likelihood(d);
  while (b - a > options.tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = log_likelihood(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = log_likelihood(d);
    }
  }
  MleResult out;
  out.phi = 0.5 * (a + b);
  // The grid endpoint may beat the refined interior point.
  if (arg == 0 && ll[0] >= log_likelihood(out.phi)) out.phi = lo;
  if (arg == n - 1 && ll[n - 1] >= log_likelihood(out.phi)) out.phi = hi;
  out.phi = std::clamp(out.phi, lo, hi);
  out.boundary_warning = arg == 0 || arg == n - 1 || out.phi - lo <= options.tolerance ||
                         hi - out.phi <= options.tolerance;
  return out;
}

void TrialConfig::validate(const JointGenerator& gen) const {
  if (shots_per_trial < 1) throw ValidationError("trial: shots_per_trial must be >= 1");
  if (n_trials < 1) throw ValidationError("trial: n_trials must be >= 1");
  const auto [lo, hi] = search_interval;
  if (!(lo < hi) || !(phi_true > lo && phi_true < hi)) {
    throw ValidationError("trial: search_interval must strictly contain phi_true");
  }
  if (gen.seminorm() > 0.0) {
    const double period = 2.0 * std::numbers::pi / gen.seminorm();
    if (hi - lo >= period) {
      std::ostringstream msg;
      msg << "trial: search interval width " << hi - lo << " reaches the phase period " << period;
      throw ValidationError(msg.str());
    }
  }
  validate_povm(povm);
  if (povm.front().dim() != gen.dim()) throw ValidationError("trial: POVM dimension mismatch");
}

PhaseModel::PhaseModel(const JointGenerator& gen, const PureState& state, const Povm& povm)
    : spectrum_(gen.spectrum()), labels_(state.basis_labels()) {
  if (state.dim() != gen.dim()) throw UsageError("PhaseModel: state/generator dimension mismatch");
  coeff_ = spectrum_.eigenvectors.adjoint() * state.amplitudes();
  elements_.reserve(povm.size());
  for (const auto& e : povm) {
    if (e.dim() != gen.dim()) throw UsageError("PhaseModel: POVM dimension mismatch");
    elements_.push_back(spectrum_.eigenvectors.adjoint() * e.matrix() * spectrum_.eigenvectors);
  }
}

std::vector<double> PhaseModel::operator()(double phi) const {
  Vector d = coeff_;
  for (Eigen::Index k = 0; k < d.size(); ++k) d(k) *= std::polar(1.0, -phi * spectrum_.eigenvalues(k));
  std::vector<double> p;
  p.reserve(elements_.size());
  for (const auto& m : elements_) p.push_back(d.dot(m * d).real());
  return p;
}

PureState PhaseModel::state_at(double phi) const {
  Vector d = coeff_;
  for (Eigen::Index k = 0; k < d.size(); ++k) d(k) *= std::polar(1.0, -phi * spectrum_.eigenvalues(k));
  return PureState::normalized(spectrum_.eigenvectors * d, labels_);
}

TrialResult precision_trial(const JointGenerator& gen, const PureState& state,
                            const TrialConfig& config, std::size_t workers) {
  config.validate(gen);
  const PhaseModel model(gen, state, config.povm);
  const auto truth = checked_distribution(model(config.phi_true));
  const ProbabilityModel likelihood = [&model](double phi) { return model(phi); };

  TrialResult result;
  result.estimates.assign(config.n_trials, 0.0);
  std::vector<char> warned(config.n_trials, 0);

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      std::mt19937_64 rng(stream_seed(config.rng_seed, t));
      const Counts counts = sample_from(truth, config.shots_per_trial, rng);
      const MleResult est = mle_estimate(counts, likelihood, config.search_interval);
      result.estimates[t] = est.phi;
      warned[t] = est.boundary_warning ? 1 : 0;
    }
  };

  workers = std::clamp<std::size_t>(workers, 1, config.n_trials);
  if (workers == 1) {
    run(0, config.n_trials);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (config.n_trials + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(config.n_trials, begin + chunk);
      if (begin < end) pool.emplace_back(run, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  double sq = 0.0;
  for (std::size_t t = 0; t < config.n_trials; ++t) {
    const double e = result.estimates[t] - config.phi_true;
    sq += e * e;
    result.boundary_warnings += static_cast<std::size_t>(warned[t]);
  }
  result.empirical_rmse = std::sqrt(sq / static_cast<double>(config.n_trials));

  const double fisher = classical_fisher(
      config.povm, [&model](double phi) { return model.state_at(phi); }, config.phi_true);
  if (!(fisher > 0.0)) throw DomainError("precision_trial: measurement carries no Fisher information");
  result.predicted_crb = 1.0 / std::sqrt(static_cast<double>(config.shots_per_trial) * fisher);
  return result;
}

Povm extreme_pair_povm(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw UsageError("extreme_pair_povm: vector sizes differ");
  const Vector plus = (a + b).normalized();
  const Vector minus = (a - b).normalized();
  const Matrix pp = plus * plus.adjoint();
  const Matrix pm = minus * minus.adjoint();
  const Matrix rest = Matrix::Identity(a.size(), a.size()) - pp - pm;
  Povm out{HermitianOperator(pp), HermitianOperator(pm)};
  if (rest.cwiseAbs().maxCoeff() > 1e-12) out.emplace_back(rest);
  return out;
}

Povm default_povm(const JointGenerator& gen) {
  if (!(gen.seminorm() > 0.0)) throw DegenerateGeneratorError("default_povm: zero semi-norm");
  const Spectrum& s = gen.spectrum();
  const auto top = static_cast<Eigen::Index>(max_eigenvector_column(s));
  return extreme_pair_povm(s.eigenvectors.col(top), s.eigenvectors.col(0));
}

Povm noon_povm(std::size_t n_photons) {
  const std::size_t dim = (n_photons + 1) * (n_photons + 1);
  Vector a = Vector::Zero(static_cast<Eigen::Index>(dim));
  Vector b = a;
  a(static_cast<Eigen::Index>(two_mode_index(n_photons, 0, n_photons))) = 1.0;
  b(static_cast<Eigen::Index>(two_mode_index(0, n_photons, n_photons))) = 1.0;
  return extreme_pair_povm(a, b);
}

Povm product_povm(const Povm& site, std::size_t n_sites) {
  if (n_sites < 1) throw UsageError("product_povm: needs at least one site");
  Povm out = site;
  for (std::size_t j = 1; j < n_sites; ++j) {
    Povm next;
    next.reserve(out.size() * site.size());
    for (const auto& e : out)
      for (const auto& f : site) next.push_back(tensor_product(e, f));
    out = std::move(next);
  }
  return out;
}

}  // namespace qmetro
