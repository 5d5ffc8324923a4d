#pragma once

// Joint generators of the standard parallel measurement procedures over N
// identical subsystems, plus closed-form extreme eigenvalues and query counts.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmetro/networks.hpp"
#include "qmetro/opalg.hpp"

namespace qmetro {

enum class ProcedureKind { linear, kbody, exponential, sequential };

const char* to_string(ProcedureKind kind) noexcept;
ProcedureKind procedure_kind_from_string(const std::string& name);

inline constexpr std::size_t kMaxExponentialSystems = 10;

struct ProcedureSpec {
  ProcedureKind kind = ProcedureKind::linear;
  std::size_t n_systems = 1;
  std::size_t body_order = 1;   // k, kbody only
  std::size_t repetitions = 1;  // T, sequential only
  ProcedureKind inner_kind = ProcedureKind::linear;  // wrapped kind, sequential only
  double lambda_min = 0.0;
  double lambda_max = 1.0;
  std::size_t subsystem_dim = 2;
  // kbody k = 2 only: also add the j == l terms of the double sum.
  bool include_self_pairs = false;
  // Overrides the default diagonal base diag(lambda_min .. lambda_max).
  std::optional<HermitianOperator> base_operator;

  // Structural checks that do not depend on the Hilbert-space size.
  void validate() const;
  // validate() plus the dimension cap for materializing the generator.
  void validate_for_construction() const;

  // The kind actually building the generator (inner_kind for sequential).
  ProcedureKind effective_kind() const noexcept {
    return kind == ProcedureKind::sequential ? inner_kind : kind;
  }
  std::size_t effective_order() const noexcept {
    return effective_kind() == ProcedureKind::kbody ? body_order : 1;
  }
};

HermitianOperator base_generator(const ProcedureSpec& spec);

class JointGenerator {
 public:
  JointGenerator(HermitianOperator generator, std::optional<std::uint64_t> query_complexity,
                 std::optional<double> query_constant = std::nullopt);

  const HermitianOperator& generator() const noexcept { return generator_; }
  const Spectrum& spectrum() const noexcept { return spectrum_; }
  std::optional<std::uint64_t> query_complexity() const noexcept { return q_; }
  // c such that the query bound reads c / Q.
  std::optional<double> query_constant() const noexcept { return c_; }
  double h_min() const noexcept { return h_min_; }
  double h_max() const noexcept { return h_max_; }
  double seminorm() const noexcept { return h_max_ - h_min_; }
  std::size_t dim() const noexcept { return generator_.dim(); }

  // Warnings carried into reports, e.g. k > N/2.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  HermitianOperator generator_;
  Spectrum spectrum_;
  std::optional<std::uint64_t> q_;
  std::optional<double> c_;
  double h_min_;
  double h_max_;
  std::vector<std::string> warnings_;
};

struct ConstructionOptions {
  // Build from explicit Kronecker products even when the base is diagonal.
  bool force_dense = false;
};

JointGenerator linear_generator(const ProcedureSpec& spec, const ConstructionOptions& options = {});
JointGenerator kbody_generator(const ProcedureSpec& spec, const ConstructionOptions& options = {});
JointGenerator exponential_generator(const ProcedureSpec& spec,
                                     const ConstructionOptions& options = {});
JointGenerator sequential_wrap(const JointGenerator& inner, std::size_t repetitions);

// Dispatches on spec.kind (sequential wraps spec.inner_kind).
JointGenerator build_generator(const ProcedureSpec& spec, const ConstructionOptions& options = {});

// Generator, query count and query constant read off an arbitrary network.
JointGenerator network_generator(const QuantumNetwork& net, double phi);

// The procedure as an explicit network of black boxes with identity V_j.
QuantumNetwork procedure_network(const ProcedureSpec& spec);

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);
std::uint64_t query_complexity(const ProcedureSpec& spec);

struct Extremes {
  std::uint64_t q = 0;
  double h_min = 0.0;
  double h_max = 0.0;
};

Extremes closed_form_extremes(const ProcedureSpec& spec);

// Q / (h_max - h_min) for the exponential procedure; 1/(lmax^k - lmin^k) otherwise.
double query_constant(const ProcedureSpec& spec);

struct SnlBaseline {
  double delta_h_separable = 0.0;
  double snl_bound = 0.0;
};

SnlBaseline snl_baseline(const ProcedureSpec& spec);

/// Diagonal fast path for two-level subsystems with a diagonal base: every
/// joint eigenvalue depends only on the number w of sites sitting in the
/// lambda_max level. value_by_weight[w] is that eigenvalue, w = 0..N. Works
/// far beyond the dense dimension cap.
struct WeightSpectrum {
  std::vector<double> value_by_weight;
  std::uint64_t query_complexity = 0;

  std::size_t n_systems() const noexcept { return value_by_weight.size() - 1; }
  double h_min() const;
  double h_max() const;
};

WeightSpectrum weight_spectrum(const ProcedureSpec& spec);

}  // namespace qmetro
