#include "qmetro/states.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qmetro/error.hpp"

namespace qmetro {

const char* to_string(StateKind kind) noexcept {
  switch (kind) {
    case StateKind::optimal_mu: return "optimal_mu";
    case StateKind::noon: return "noon";
    case StateKind::product_balanced: return "product_balanced";
    case StateKind::coherent: return "coherent";
  }
  return "unknown";
}

StateKind state_kind_from_string(const std::string& name) {
  if (name == "optimal_mu") return StateKind::optimal_mu;
  if (name == "noon") return StateKind::noon;
  if (name == "product_balanced") return StateKind::product_balanced;
  if (name == "coherent") return StateKind::coherent;
  throw ValidationError("unknown state kind '" + name + "'");
}

void StateFamily::validate() const {
  switch (kind) {
    case StateKind::optimal_mu:
      if (!(mu >= 0.0 && mu <= 1.0)) throw ValidationError("state: mu must lie in [0, 1]");
      if (!std::isfinite(rel_phase)) throw ValidationError("state: rel_phase must be finite");
      break;
    case StateKind::noon:
      if (n_photons < 1) throw ValidationError("state: n_photons must be >= 1");
      break;
    case StateKind::coherent:
      if (cutoff < 1 || static_cast<double>(cutoff) < 10.0 * std::norm(alpha)) {
        throw ValidationError("state: coherent cutoff must be >= 10 |alpha|^2");
      }
      break;
    case StateKind::product_balanced: break;
  }
}

std::size_t max_eigenvector_column(const Spectrum& spectrum, double tol) {
  const double top = spectrum.max();
  const double scale = std::max(1.0, std::abs(top));
  std::size_t col = spectrum.dim() - 1;
  while (col > 0 && top - spectrum.eigenvalues(static_cast<Eigen::Index>(col - 1)) <= tol * scale) {
    --col;
  }
  return col;
}

PureState optimal_state(const JointGenerator& gen, double mu, double rel_phase) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ValidationError("optimal_state: mu must lie in [0, 1]");
  const double width = gen.seminorm();
  if (!(width > 1e-12 * std::max(1.0, std::abs(gen.h_max())))) {
    throw DegenerateGeneratorError("optimal_state: generator has zero semi-norm");
  }
  const Spectrum& s = gen.spectrum();
  const auto top = static_cast<Eigen::Index>(max_eigenvector_column(s));
  const Vector psi = std::sqrt(mu) * s.eigenvectors.col(top) +
                     std::sqrt(1.0 - mu) * std::polar(1.0, rel_phase) * s.eigenvectors.col(0);
  return PureState::normalized(psi);
}

std::size_t two_mode_index(std::size_t n1, std::size_t n2, std::size_t cutoff) {
  if (n1 > cutoff || n2 > cutoff) throw UsageError("two_mode_index: occupation above cutoff");
  return n1 * (cutoff + 1) + n2;
}

std::vector<std::string> two_mode_labels(std::size_t cutoff) {
  std::vector<std::string> labels;
  labels.reserve((cutoff + 1) * (cutoff + 1));
  for (std::size_t a = 0; a <= cutoff; ++a)
    for (std::size_t b = 0; b <= cutoff; ++b)
      labels.push_back("|" + std::to_string(a) + "," + std::to_string(b) + ">");
  return labels;
}

PureState noon_state(std::size_t n_photons) {
  if (n_photons < 1) throw ValidationError("noon_state: needs at least one photon");
  const std::size_t dim = (n_photons + 1) * (n_photons + 1);
  check_dimension(dim, "noon_state");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  const double amp = 1.0 / std::sqrt(2.0);
  v(static_cast<Eigen::Index>(two_mode_index(n_photons, 0, n_photons))) = amp;
  v(static_cast<Eigen::Index>(two_mode_index(0, n_photons, n_photons))) = amp;
  return PureState(std::move(v), two_mode_labels(n_photons));
}

HermitianOperator mode_number_operator(std::size_t cutoff, std::size_t mode) {
  if (mode > 1) throw UsageError("mode_number_operator: mode must be 0 or 1");
  std::vector<double> d;
  d.reserve((cutoff + 1) * (cutoff + 1));
  for (std::size_t a = 0; a <= cutoff; ++a)
    for (std::size_t b = 0; b <= cutoff; ++b) d.push_back(static_cast<double>(mode == 0 ? a : b));
  return HermitianOperator::diagonal(d);
}

HermitianOperator photon_sector_generator(std::size_t n_photons) {
  std::vector<double> d(n_photons + 1);
  for (std::size_t j = 0; j <= n_photons; ++j) d[j] = static_cast<double>(j);
  return HermitianOperator::diagonal(d);
}

PureState embed_photon_sector(const PureState& sector_state, std::size_t n_photons) {
  if (sector_state.dim() != n_photons + 1) {
    throw UsageError("embed_photon_sector: sector state has the wrong dimension");
  }
  const std::size_t dim = (n_photons + 1) * (n_photons + 1);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j <= n_photons; ++j) {
    v(static_cast<Eigen::Index>(two_mode_index(j, n_photons - j, n_photons))) =
        sector_state.amplitude(j);
  }
  return PureState(std::move(v), two_mode_labels(n_photons));
}

PureState product_balanced_state(std::size_t n_systems, const Spectrum& base_spectrum) {
  if (n_systems < 1) throw ValidationError("product_balanced_state: n_systems must be >= 1");
  if (base_spectrum.dim() < 2) {
    throw ValidationError("product_balanced_state: base needs two extreme eigenvectors");
  }
  const auto top = static_cast<Eigen::Index>(max_eigenvector_column(base_spectrum));
  const PureState site = PureState::normalized(base_spectrum.eigenvectors.col(top) +
                                               base_spectrum.eigenvectors.col(0));
  PureState out = site;
  for (std::size_t j = 1; j < n_systems; ++j) out = tensor_product(out, site);
  return out;
}

HermitianOperator number_operator(std::size_t cutoff) {
  std::vector<double> d(cutoff + 1);
  for (std::size_t n = 0; n <= cutoff; ++n) d[n] = static_cast<double>(n);
  return HermitianOperator::diagonal(d);
}

CoherentState coherent_state(Complex alpha, std::size_t cutoff) {
  const double mean = std::norm(alpha);
  if (cutoff < 1 || static_cast<double>(cutoff) < 10.0 * mean) {
    std::ostringstream msg;
    msg << "coherent_state: cutoff " << cutoff << " below 10 |alpha|^2 = " << 10.0 * mean;
    throw ValidationError(msg.str());
  }
  check_dimension(cutoff + 1, "coherent_state");
  Vector c(static_cast<Eigen::Index>(cutoff + 1));
  c(0) = std::exp(-0.5 * mean);
  for (std::size_t n = 1; n <= cutoff; ++n) {
    c(static_cast<Eigen::Index>(n)) =
        c(static_cast<Eigen::Index>(n - 1)) * alpha / std::sqrt(static_cast<double>(n));
  }
  const double deficit = std::max(0.0, 1.0 - c.squaredNorm());
  if (deficit > kMaxTruncationDeficit) {
    std::ostringstream msg;
    msg << "coherent_state: truncation deficit " << deficit << " above " << kMaxTruncationDeficit
        << "; raise the cutoff";
    throw ValidationError(msg.str());
  }
  std::vector<std::string> labels;
  for (std::size_t n = 0; n <= cutoff; ++n) labels.push_back("|" + std::to_string(n) + ">");
  return CoherentState{PureState::normalized(std::move(c), std::move(labels)), deficit};
}

std::vector<double> product_balanced_weights(std::size_t n_systems) {
  std::vector<double> p(n_systems + 1);
  p[0] = std::ldexp(1.0, -static_cast<int>(n_systems));
  for (std::size_t w = 0; w < n_systems; ++w) {
    p[w + 1] = p[w] * static_cast<double>(n_systems - w) / static_cast<double>(w + 1);
  }
  return p;
}

std::vector<double> optimal_weights(const WeightSpectrum& spectrum, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ValidationError("optimal_weights: mu must lie in [0, 1]");
  const auto& v = spectrum.value_by_weight;
  const auto lo = std::min_element(v.begin(), v.end()) - v.begin();
  const auto hi = std::max_element(v.begin(), v.end()) - v.begin();
  if (v[static_cast<std::size_t>(hi)] == v[static_cast<std::size_t>(lo)]) {
    throw DegenerateGeneratorError("optimal_weights: generator has zero semi-norm");
  }
  std::vector<double> p(v.size(), 0.0);
  p[static_cast<std::size_t>(hi)] = mu;
  p[static_cast<std::size_t>(lo)] += 1.0 - mu;
  return p;
}

}  // namespace qmetro
