#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "qmetro/opalg.hpp"
#include "qmetro/procedures.hpp"

namespace qmetro {

enum class StateKind { optimal_mu, noon, product_balanced, coherent };

const char* to_string(StateKind kind) noexcept;
StateKind state_kind_from_string(const std::string& name);

struct StateFamily {
  StateKind kind = StateKind::optimal_mu;
  double mu = 0.5;
  double rel_phase = 0.0;
  std::size_t n_photons = 1;
  Complex alpha{0.0, 0.0};
  std::size_t cutoff = 1;

  void validate() const;
};

// Column of the extreme eigenvectors used by optimal_state. Ties resolve to
// the first column of the degenerate block in the ascending eigensystem.
std::size_t max_eigenvector_column(const Spectrum& spectrum, double tol = 1e-9);

/// sqrt(mu)|h_max> + sqrt(1 - mu) e^{i rel_phase} |h_min>
PureState optimal_state(const JointGenerator& gen, double mu, double rel_phase = 0.0);

// Two-mode Fock space with per-mode cutoff n; index = n1 * (n + 1) + n2.
std::size_t two_mode_index(std::size_t n1, std::size_t n2, std::size_t cutoff);
std::vector<std::string> two_mode_labels(std::size_t cutoff);

/// (|N,0> + |0,N>)/sqrt(2) on the two-mode space with cutoff N.
PureState noon_state(std::size_t n_photons);

// Photon number of one mode (0 or 1) on the two-mode space with cutoff n.
HermitianOperator mode_number_operator(std::size_t cutoff, std::size_t mode);

// n1 restricted to the N-photon sector, basis |j, N - j> for j = 0..N.
HermitianOperator photon_sector_generator(std::size_t n_photons);
// Maps a sector state (basis |j, N - j>) into the two-mode space.
PureState embed_photon_sector(const PureState& sector_state, std::size_t n_photons);

/// N-fold tensor power of (|lambda_max> + |lambda_min>)/sqrt(2).
PureState product_balanced_state(std::size_t n_systems, const Spectrum& base_spectrum);

inline constexpr double kMaxTruncationDeficit = 1e-8;

struct CoherentState {
  PureState state;
  double truncation_deficit;  // 1 - sum_{n <= cutoff} |c_n|^2 before renormalizing
};

/// Truncated Fock expansion of |alpha>, renormalized.
CoherentState coherent_state(Complex alpha, std::size_t cutoff);

// a^dagger a on the truncated single-mode space, diag(0, 1, ..., cutoff).
HermitianOperator number_operator(std::size_t cutoff);

// Weight (number of sites in lambda_max) distributions for the diagonal fast path.
std::vector<double> product_balanced_weights(std::size_t n_systems);
std::vector<double> optimal_weights(const WeightSpectrum& spectrum, double mu);

}  // namespace qmetro
