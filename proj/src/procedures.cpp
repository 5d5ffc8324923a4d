#include "qmetro/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "qmetro/error.hpp"

namespace qmetro {

const char* to_string(ProcedureKind kind) noexcept {
  switch (kind) {
    case ProcedureKind::linear: return "linear";
    case ProcedureKind::kbody: return "kbody";
    case ProcedureKind::exponential: return "exponential";
    case ProcedureKind::sequential: return "sequential";
  }
  return "unknown";
}

ProcedureKind procedure_kind_from_string(const std::string& name) {
  if (name == "linear") return ProcedureKind::linear;
  if (name == "kbody") return ProcedureKind::kbody;
  if (name == "exponential") return ProcedureKind::exponential;
  if (name == "sequential") return ProcedureKind::sequential;
  throw ValidationError("unknown procedure kind '" + name + "'");
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    // r * (n - i) is divisible by i + 1; reduce first so the product stays exact.
    const std::uint64_t g = std::gcd(r, i + 1);
    const std::uint64_t factor = (n - i) / ((i + 1) / g);
    if (r / g > std::numeric_limits<std::uint64_t>::max() / factor) {
      throw ValidationError("binomial coefficient overflows 64 bits");
    }
    r = (r / g) * factor;
  }
  return r;
}

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw ValidationError("query count overflows 64 bits");
  }
  return a * b;
}

std::uint64_t inner_query_complexity(const ProcedureSpec& spec) {
  const std::uint64_t n = spec.n_systems;
  switch (spec.effective_kind()) {
    case ProcedureKind::linear: return n;
    case ProcedureKind::kbody:
      return binomial(n, spec.body_order) +
             ((spec.include_self_pairs && spec.body_order == 2) ? n : 0);
    case ProcedureKind::exponential:
      if (n >= 64) throw ValidationError("exponential query count overflows 64 bits");
      return (std::uint64_t{1} << n) - 1;
    case ProcedureKind::sequential: break;
  }
  throw ValidationError("sequential procedures cannot wrap another sequential procedure");
}

std::size_t full_dimension(const ProcedureSpec& spec) {
  std::size_t dim = 1;
  for (std::size_t i = 0; i < spec.n_systems; ++i) {
    if (dim > kMaxDimension / spec.subsystem_dim) {
      std::ostringstream msg;
      msg << "procedure: " << spec.subsystem_dim << "^" << spec.n_systems
          << " exceeds the dimension cap " << kMaxDimension;
      throw ValidationError(msg.str());
    }
    dim *= spec.subsystem_dim;
  }
  return dim;
}

double kbody_const(double lmin, double lmax, std::size_t k) {
  const double gap = std::pow(lmax, static_cast<double>(k)) - std::pow(lmin, static_cast<double>(k));
  if (!(gap > 0.0)) {
    std::ostringstream msg;
    msg << "query constant: lambda_max^" << k << " - lambda_min^" << k << " = " << gap
        << " is not positive";
    throw DomainError(msg.str());
  }
  return 1.0 / gap;
}

// Site eigenvalues of a diagonal base, indexed by local level.
RealVector site_values(const ProcedureSpec& spec) {
  return base_generator(spec).diagonal_values();
}

// Elementary symmetric polynomials e_0..e_kmax of the given values.
std::vector<double> elementary_symmetric(const std::vector<double>& values, std::size_t kmax) {
  std::vector<double> e(kmax + 1, 0.0);
  e[0] = 1.0;
  for (double v : values) {
    for (std::size_t j = kmax; j >= 1; --j) e[j] += e[j - 1] * v;
  }
  return e;
}

Matrix kron_power(const Matrix& h, std::size_t k) {
  Matrix out = h;
  for (std::size_t i = 1; i < k; ++i) out = kronecker(out, h);
  return out;
}

// Visits all size-k subsets of {0..n-1} in lexicographic order.
template <typename F>
void for_each_subset(std::size_t n, std::size_t k, F&& visit) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Subset orders contributing to the generator of the effective kind.
std::vector<std::size_t> subset_orders(const ProcedureSpec& spec) {
  switch (spec.effective_kind()) {
    case ProcedureKind::linear: return {1};
    case ProcedureKind::kbody: return {spec.body_order};
    case ProcedureKind::exponential: {
      std::vector<std::size_t> all;
      for (std::size_t j = 1; j <= spec.n_systems; ++j) all.push_back(j);
      return all;
    }
    case ProcedureKind::sequential: break;
  }
  return {};
}

bool self_pairs(const ProcedureSpec& spec) {
  return spec.effective_kind() == ProcedureKind::kbody && spec.body_order == 2 &&
         spec.include_self_pairs;
}

HermitianOperator construct_diagonal(const ProcedureSpec& spec) {
  const std::size_t n = spec.n_systems;
  const std::size_t d = spec.subsystem_dim;
  const std::size_t dim = full_dimension(spec);
  const RealVector site = site_values(spec);
  const auto orders = subset_orders(spec);
  const std::size_t kmax = orders.back();

  std::vector<double> diag(dim);
  std::vector<double> values(n);
  for (std::size_t index = 0; index < dim; ++index) {
    std::size_t rest = index;
    for (std::size_t s = n; s-- > 0;) {
      values[s] = site(static_cast<Eigen::Index>(rest % d));
      rest /= d;
    }
    const auto e = elementary_symmetric(values, kmax);
    double total = 0.0;
    for (auto k : orders) total += e[k];
    if (self_pairs(spec)) {
      for (double v : values) total += v * v;
    }
    diag[index] = total;
  }
  return HermitianOperator::diagonal(diag);
}

HermitianOperator construct_dense(const ProcedureSpec& spec) {
  const std::size_t n = spec.n_systems;
  const std::size_t dim = full_dimension(spec);
  const Matrix h = base_generator(spec).matrix();
  Matrix total = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (auto k : subset_orders(spec)) {
    const Matrix local = kron_power(h, k);
    for_each_subset(n, k, [&](const std::vector<std::size_t>& subset) {
      total += embed_operator(local, subset, n, spec.subsystem_dim);
    });
  }
  if (self_pairs(spec)) {
    const Matrix h2 = h * h;
    for (std::size_t j = 0; j < n; ++j) total += embed_operator(h2, {j}, n, spec.subsystem_dim);
  }
  return HermitianOperator(std::move(total));
}

JointGenerator construct(const ProcedureSpec& spec, ProcedureKind expected,
                         const ConstructionOptions& options) {
  spec.validate_for_construction();
  if (spec.kind != expected) {
    throw UsageError(std::string("procedure spec kind is not ") + to_string(expected));
  }
  const bool diagonal = base_generator(spec).is_diagonal();
  HermitianOperator gen =
      (diagonal && !options.force_dense) ? construct_diagonal(spec) : construct_dense(spec);
  const std::uint64_t q = inner_query_complexity(spec);

  std::optional<double> c;
  if (expected == ProcedureKind::exponential) {
    if (spec.lambda_min >= 0.0) {
      c = query_constant(spec);
    } else {
      const Spectrum s = hermitian_eigensystem(gen);
      if (s.max() > s.min()) c = static_cast<double>(q) / (s.max() - s.min());
    }
  } else {
    try {
      c = kbody_const(spec.lambda_min, spec.lambda_max, spec.effective_order());
    } catch (const DomainError&) {
      c.reset();
    }
  }
  JointGenerator out(std::move(gen), q, c);
  if (expected == ProcedureKind::kbody && 2 * spec.body_order > spec.n_systems) {
    out.add_warning("k_exceeds_half_n");
  }
  return out;
}

}  // namespace

void ProcedureSpec::validate() const {
  if (n_systems < 1) throw ValidationError("procedure: n_systems must be >= 1");
  if (subsystem_dim < 2) throw ValidationError("procedure: subsystem_dim must be >= 2");
  if (!std::isfinite(lambda_min) || !std::isfinite(lambda_max) || !(lambda_max > lambda_min)) {
    throw ValidationError("procedure: requires finite lambda_max > lambda_min");
  }
  if (kind == ProcedureKind::sequential) {
    if (inner_kind == ProcedureKind::sequential) {
      throw ValidationError("procedure: sequential cannot wrap sequential");
    }
    if (repetitions < 1) throw ValidationError("procedure: repetitions must be >= 1");
  }
  if (effective_kind() == ProcedureKind::kbody) {
    if (body_order < 1) throw ValidationError("procedure: body_order must be >= 1");
    if (body_order > n_systems) {
      std::ostringstream msg;
      msg << "procedure: body_order " << body_order << " exceeds n_systems " << n_systems;
      throw UsageError(msg.str());
    }
  }
  if (base_operator) {
    if (base_operator->dim() != subsystem_dim) {
      throw ValidationError("procedure: base_operator dimension differs from subsystem_dim");
    }
    const Spectrum s = hermitian_eigensystem(*base_operator);
    if (std::abs(s.min() - lambda_min) > 1e-9 || std::abs(s.max() - lambda_max) > 1e-9) {
      throw ValidationError("procedure: base_operator extremes disagree with lambda_min/lambda_max");
    }
  }
}

void ProcedureSpec::validate_for_construction() const {
  validate();
  if (effective_kind() == ProcedureKind::exponential && n_systems > kMaxExponentialSystems) {
    std::ostringstream msg;
    msg << "procedure: exponential kind supports N <= " << kMaxExponentialSystems << ", got "
        << n_systems;
    throw ValidationError(msg.str());
  }
  full_dimension(*this);
}

HermitianOperator base_generator(const ProcedureSpec& spec) {
  if (spec.base_operator) return *spec.base_operator;
  std::vector<double> d(spec.subsystem_dim);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = spec.lambda_min +
           (spec.lambda_max - spec.lambda_min) * static_cast<double>(i) /
               static_cast<double>(d.size() - 1);
  }
  d.back() = spec.lambda_max;
  return HermitianOperator::diagonal(d);
}

JointGenerator::JointGenerator(HermitianOperator generator,
                               std::optional<std::uint64_t> query_complexity,
                               std::optional<double> query_constant)
    : generator_(std::move(generator)),
      spectrum_(hermitian_eigensystem(generator_)),
      q_(query_complexity),
      c_(query_constant),
      h_min_(spectrum_.min()),
      h_max_(spectrum_.max()) {}

JointGenerator linear_generator(const ProcedureSpec& spec, const ConstructionOptions& options) {
  return construct(spec, ProcedureKind::linear, options);
}

JointGenerator kbody_generator(const ProcedureSpec& spec, const ConstructionOptions& options) {
  return construct(spec, ProcedureKind::kbody, options);
}

JointGenerator exponential_generator(const ProcedureSpec& spec,
                                     const ConstructionOptions& options) {
  return construct(spec, ProcedureKind::exponential, options);
}

JointGenerator sequential_wrap(const JointGenerator& inner, std::size_t repetitions) {
  if (repetitions < 1) throw ValidationError("sequential_wrap: repetitions must be >= 1");
  std::optional<std::uint64_t> q;
  if (inner.query_complexity()) q = checked_mul(*inner.query_complexity(), repetitions);
  JointGenerator out(inner.generator().scaled(static_cast<double>(repetitions)), q,
                     inner.query_constant());
  for (const auto& w : inner.warnings()) out.add_warning(w);
  return out;
}

JointGenerator build_generator(const ProcedureSpec& spec, const ConstructionOptions& options) {
  spec.validate_for_construction();
  if (spec.kind == ProcedureKind::sequential) {
    ProcedureSpec inner = spec;
    inner.kind = spec.inner_kind;
    return sequential_wrap(build_generator(inner, options), spec.repetitions);
  }
  return construct(spec, spec.kind, options);
}

JointGenerator network_generator(const QuantumNetwork& net, double phi) {
  auto result = generator_analytic(net, phi);
  const auto& boxes = net.boxes();
  std::optional<double> c;
  if (!boxes.empty() && boxes.front().seminorm() > 0.0) {
    const double width = boxes.front().seminorm();
    bool common = true;
    for (const auto& b : boxes) common = common && std::abs(b.seminorm() - width) <= 1e-12 * width;
    if (common) c = 1.0 / width;
  }
  return JointGenerator(std::move(result.generator), query_count(net), c);
}

QuantumNetwork procedure_network(const ProcedureSpec& spec) {
  spec.validate_for_construction();
  const Matrix h = base_generator(spec).matrix();
  std::vector<BlackBox> boxes;
  for (auto k : subset_orders(spec)) {
    const HermitianOperator local(kron_power(h, k));
    for_each_subset(spec.n_systems, k,
                    [&](const std::vector<std::size_t>& subset) { boxes.emplace_back(local, subset); });
  }
  if (self_pairs(spec)) {
    const HermitianOperator h2(h * h);
    for (std::size_t j = 0; j < spec.n_systems; ++j) boxes.emplace_back(h2, std::vector{j});
  }
  if (spec.kind == ProcedureKind::sequential) {
    const auto once = boxes;
    for (std::size_t t = 1; t < spec.repetitions; ++t) boxes.insert(boxes.end(), once.begin(), once.end());
  }
  return QuantumNetwork::parallel(spec.n_systems, spec.subsystem_dim, std::move(boxes));
}

std::uint64_t query_complexity(const ProcedureSpec& spec) {
  spec.validate();
  const std::uint64_t inner = inner_query_complexity(spec);
  return spec.kind == ProcedureKind::sequential ? checked_mul(inner, spec.repetitions) : inner;
}

Extremes closed_form_extremes(const ProcedureSpec& spec) {
  spec.validate();
  const double lmin = spec.lambda_min;
  const double lmax = spec.lambda_max;
  const auto n = static_cast<double>(spec.n_systems);
  Extremes out;
  out.q = query_complexity(spec);

  switch (spec.effective_kind()) {
    case ProcedureKind::linear:
      out.h_min = n * lmin;
      out.h_max = n * lmax;
      break;
    case ProcedureKind::kbody: {
      if (lmin < 0.0) {
        throw DomainError("closed_form_extremes: kbody kind requires lambda_min >= 0");
      }
      const auto k = static_cast<double>(spec.body_order);
      const auto pairs = static_cast<double>(binomial(spec.n_systems, spec.body_order));
      out.h_min = pairs * std::pow(lmin, k);
      out.h_max = pairs * std::pow(lmax, k);
      if (self_pairs(spec)) {
        out.h_min += n * lmin * lmin;
        out.h_max += n * lmax * lmax;
      }
      break;
    }
    case ProcedureKind::exponential: {
      if (lmin < 0.0) {
        throw DomainError("closed_form_extremes: exponential kind requires lambda_min >= 0");
      }
      for (std::size_t j = 1; j <= spec.n_systems; ++j) {
        const auto qj = static_cast<double>(binomial(spec.n_systems, j));
        out.h_min += qj * std::pow(lmin, static_cast<double>(j));
        out.h_max += qj * std::pow(lmax, static_cast<double>(j));
      }
      break;
    }
    case ProcedureKind::sequential: break;
  }
  if (spec.kind == ProcedureKind::sequential) {
    const auto t = static_cast<double>(spec.repetitions);
    out.h_min *= t;
    out.h_max *= t;
  }
  return out;
}

double query_constant(const ProcedureSpec& spec) {
  spec.validate();
  if (spec.effective_kind() == ProcedureKind::exponential) {
    ProcedureSpec inner = spec;
    inner.kind = ProcedureKind::exponential;
    const Extremes e = closed_form_extremes(inner);
    return static_cast<double>(e.q) / (e.h_max - e.h_min);
  }
  return kbody_const(spec.lambda_min, spec.lambda_max, spec.effective_order());
}

SnlBaseline snl_baseline(const ProcedureSpec& spec) {
  spec.validate();
  if (spec.kind != ProcedureKind::linear) {
    throw DomainError(std::string("snl_baseline: unsupported for ") + to_string(spec.kind) +
                      " procedures (no universal shot-noise definition)");
  }
  const HermitianOperator base = base_generator(spec);
  const Spectrum s = hermitian_eigensystem(base);
  const Vector site = (s.eigenvectors.col(static_cast<Eigen::Index>(s.dim() - 1)) +
                       s.eigenvectors.col(0)) / std::sqrt(2.0);
  const double site_variance = moments(PureState::normalized(site), base).variance;
  SnlBaseline out;
  out.delta_h_separable = std::sqrt(static_cast<double>(spec.n_systems) * site_variance);
  out.snl_bound = 1.0 / (2.0 * out.delta_h_separable);
  return out;
}

double WeightSpectrum::h_min() const {
  return *std::min_element(value_by_weight.begin(), value_by_weight.end());
}

double WeightSpectrum::h_max() const {
  return *std::max_element(value_by_weight.begin(), value_by_weight.end());
}

WeightSpectrum weight_spectrum(const ProcedureSpec& spec) {
  spec.validate();
  if (spec.subsystem_dim != 2 || (spec.base_operator && !spec.base_operator->is_diagonal())) {
    throw UsageError("weight_spectrum: requires two-level subsystems with a diagonal base");
  }
  const std::size_t n = spec.n_systems;
  const double lo = spec.lambda_min;
  const double hi = spec.lambda_max;
  WeightSpectrum out;
  out.query_complexity = query_complexity(spec);
  out.value_by_weight.resize(n + 1);

  for (std::size_t w = 0; w <= n; ++w) {
    const auto up = static_cast<double>(w);
    const auto down = static_cast<double>(n - w);
    double value = 0.0;
    switch (spec.effective_kind()) {
      case ProcedureKind::linear: value = up * hi + down * lo; break;
      case ProcedureKind::kbody: {
        const std::size_t k = spec.body_order;
        for (std::size_t j = 0; j <= std::min(k, w); ++j) {
          if (k - j > n - w) continue;
          value += static_cast<double>(binomial(w, j)) * static_cast<double>(binomial(n - w, k - j)) *
                   std::pow(hi, static_cast<double>(j)) * std::pow(lo, static_cast<double>(k - j));
        }
        if (self_pairs(spec)) value += up * hi * hi + down * lo * lo;
        break;
      }
      case ProcedureKind::exponential:
        value = std::pow(1.0 + hi, up) * std::pow(1.0 + lo, down) - 1.0;
        break;
      case ProcedureKind::sequential: break;
    }
    if (spec.kind == ProcedureKind::sequential) value *= static_cast<double>(spec.repetitions);
    out.value_by_weight[w] = value;
  }
  return out;
}

}  // namespace qmetro
