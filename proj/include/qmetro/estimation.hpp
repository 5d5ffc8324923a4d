#pragma once

// Monte-Carlo measurement simulation and maximum-likelihood phase estimation.
//
// RNG: each trial draws from std::mt19937_64 seeded with
// splitmix64(seed + (trial_index + 1) * 0x9E3779B97F4A7C15). Uniforms take the
// top 53 bits of a draw; outcomes come from the inverse CDF of the Born
// probabilities, one draw per shot.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qmetro/metrology.hpp"
#include "qmetro/opalg.hpp"
#include "qmetro/procedures.hpp"

namespace qmetro {

inline constexpr const char* kRngAlgorithm = "mt19937_64+splitmix64-stream+inverse-cdf-53bit";

using Counts = std::vector<std::uint64_t>;
using ProbabilityModel = std::function<std::vector<double>(double)>;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

Counts sample_outcomes(const PureState& state, const Povm& povm, std::uint64_t shots,
                       std::uint64_t seed);

struct MleOptions {
  std::size_t grid_points = 1000;
  double tolerance = 1e-8;
};

struct MleResult {
  double phi = 0.0;
  bool boundary_warning = false;
};

/// Grid scan of the log-likelihood followed by golden-section refinement.
/// Near-equal grid maxima resolve to the smallest phi.
MleResult mle_estimate(const Counts& counts, const ProbabilityModel& model,
                       std::pair<double, double> interval, const MleOptions& options = {});

struct TrialConfig {
  double phi_true = 0.0;
  std::uint64_t shots_per_trial = 1;
  std::size_t n_trials = 1;
  std::uint64_t rng_seed = 0;
  Povm povm;
  std::pair<double, double> search_interval{0.0, 1.0};

  void validate(const JointGenerator& gen) const;
};

struct TrialResult {
  std::vector<double> estimates;
  double empirical_rmse = 0.0;
  double predicted_crb = 0.0;
  std::size_t boundary_warnings = 0;
  std::string rng_algorithm = kRngAlgorithm;
};

/// Born-rule probabilities of the evolved state, with the eigendecomposition
/// of the generator computed once.
class PhaseModel {
 public:
  PhaseModel(const JointGenerator& gen, const PureState& state, const Povm& povm);
  std::vector<double> operator()(double phi) const;
  PureState state_at(double phi) const;

 private:
  Spectrum spectrum_;
  Vector coeff_;                    // eigenbasis amplitudes of the probe
  std::vector<Matrix> elements_;    // POVM elements in the eigenbasis
  std::vector<std::string> labels_;
};

TrialResult precision_trial(const JointGenerator& gen, const PureState& state,
                            const TrialConfig& config, std::size_t workers = 1);

// {|+><+|, |-><-|, rest} with |+-> = (|a> +- |b>)/sqrt(2); rest dropped when empty.
Povm extreme_pair_povm(const Vector& a, const Vector& b);
// Measurement of |h_max><h_min| + h.c. in its eigenbasis.
Povm default_povm(const JointGenerator& gen);
// Parity-style readout of NOON states: (|N,0> +- |0,N>)/sqrt(2).
Povm noon_povm(std::size_t n_photons);
// Site POVM applied independently on each of n sites.
Povm product_povm(const Povm& site, std::size_t n_sites);

}  // namespace qmetro
