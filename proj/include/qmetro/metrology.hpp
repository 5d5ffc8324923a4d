#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qmetro/opalg.hpp"
#include "qmetro/procedures.hpp"

namespace qmetro {

/// A precision bound, or the explicit no-sensitivity signal when the
/// resource it is built from vanishes.
class Bound {
 public:
  static Bound finite(double value) { return Bound(value); }
  static Bound no_sensitivity() { return Bound(); }

  bool has_sensitivity() const noexcept { return value_.has_value(); }
  double value() const;  // throws DomainError on no-sensitivity
  std::optional<double> maybe_value() const noexcept { return value_; }

  friend bool operator==(const Bound&, const Bound&) = default;

 private:
  Bound() = default;
  explicit Bound(double v) : value_(v) {}
  std::optional<double> value_;
};

inline constexpr double kZeroResourceTol = 1e-12;
inline constexpr double kDefaultDerivativeEps = 1e-5;
inline constexpr double kProbabilityFloor = 1e-12;

struct ResourceReport {
  std::optional<std::uint64_t> q;
  double expectation_raw = 0.0;
  double expectation_shifted = 0.0;
  double stddev = 0.0;
  double seminorm = 0.0;
  Bound bound_new_hl = Bound::no_sensitivity();
  Bound bound_stddev = Bound::no_sensitivity();
  std::optional<double> bound_query;
  std::optional<double> bound_snl;
  // 1/N, only for unit-gap linear procedures where it equals c_1/Q.
  std::optional<double> bound_n_systems;
  double qfi = 0.0;
  std::vector<std::string> warnings;
};

// <H> - h_min, clamped at zero.
double resource_count_shifted(const PureState& state, const JointGenerator& gen);

Bound heisenberg_bound_expectation(double shifted_expectation);
Bound heisenberg_bound_stddev(double stddev);

// c_k / Q with c_k = 1 / (lambda_max^k - lambda_min^k).
double query_bound(std::uint64_t q, double lambda_min, double lambda_max, std::size_t k);

double qfi_pure(const PureState& state, const HermitianOperator& gen);

using StateAt = std::function<PureState(double)>;
using Povm = std::vector<HermitianOperator>;

struct DerivativeOptions {
  double eps = kDefaultDerivativeEps;
  bool richardson = false;
};

// Throws PovmError unless elements are positive and sum to the identity.
void validate_povm(const Povm& povm, double tol = 1e-9);

std::vector<double> born_probabilities(const PureState& state, const Povm& povm);

double classical_fisher(const Povm& povm, const StateAt& state_at, double phi,
                        const DerivativeOptions& options = {});

// Delta X / |d<X>/dphi|
double error_propagation(const HermitianOperator& observable, const StateAt& state_at, double phi,
                         const DerivativeOptions& options = {});

struct MuSweepRow {
  double mu;
  double shifted_expectation;
  double stddev;
};

std::vector<MuSweepRow> mu_sweep(const JointGenerator& gen, const std::vector<double>& grid);
std::vector<double> uniform_mu_grid(std::size_t points);

ResourceReport build_report(const PureState& state, const JointGenerator& gen,
                            const std::optional<ProcedureSpec>& spec = std::nullopt);

/// Moments of a weight-diagonal generator under a weight distribution.
Moments weight_moments(const WeightSpectrum& spectrum, const std::vector<double>& weights);

}  // namespace qmetro
