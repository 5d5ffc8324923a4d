#include "qmetro/networks.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <set>
#include <sstream>

#include "qmetro/error.hpp"

namespace qmetro {

namespace {

std::size_t checked_power(std::size_t base, std::size_t exponent) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (out > kMaxDimension / std::max<std::size_t>(base, 1)) {
      throw ValidationError("network: full Hilbert space exceeds the dimension cap");
    }
    out *= base;
  }
  return out;
}

}  // namespace

BlackBox::BlackBox(const HermitianOperator& base_generator,
                   std::vector<std::size_t> target_subsystems)
    : generator_(base_generator), targets_(std::move(target_subsystems)) {
  if (targets_.empty()) throw ValidationError("BlackBox: needs at least one target subsystem");
  if (std::set<std::size_t>(targets_.begin(), targets_.end()).size() != targets_.size()) {
    throw ValidationError("BlackBox: repeated target subsystem");
  }
  const Spectrum s = hermitian_eigensystem(base_generator);
  if (!s.eigenvalues.allFinite()) throw ValidationError("BlackBox: non-finite spectrum");
  shift_ = s.min();
  seminorm_ = s.max() - s.min();
  generator_ = base_generator.shifted(shift_);
}

Matrix embed_operator(const Matrix& op, const std::vector<std::size_t>& targets,
                      std::size_t n_subsystems, std::size_t subsystem_dim) {
  const std::size_t k = targets.size();
  const std::size_t full = checked_power(subsystem_dim, n_subsystems);
  const std::size_t local = checked_power(subsystem_dim, k);
  if (static_cast<std::size_t>(op.rows()) != local || static_cast<std::size_t>(op.cols()) != local) {
    throw UsageError("embed_operator: operator dimension does not match its target count");
  }
  for (auto t : targets) {
    if (t >= n_subsystems) throw UsageError("embed_operator: target subsystem out of range");
  }

  // place[t] = stride of subsystem t in the full index (subsystem 0 most significant).
  std::vector<std::size_t> stride(n_subsystems);
  for (std::size_t s = 0, acc = 1; s < n_subsystems; ++s) {
    stride[n_subsystems - 1 - s] = acc;
    acc *= subsystem_dim;
  }

  auto local_index = [&](std::size_t full_index) {
    std::size_t idx = 0;
    for (auto t : targets) idx = idx * subsystem_dim + (full_index / stride[t]) % subsystem_dim;
    return idx;
  };
  auto with_local = [&](std::size_t full_index, std::size_t local_idx) {
    std::size_t base = full_index;
    for (auto t : targets) base -= ((full_index / stride[t]) % subsystem_dim) * stride[t];
    for (std::size_t pos = k; pos-- > 0;) {
      base += (local_idx % subsystem_dim) * stride[targets[pos]];
      local_idx /= subsystem_dim;
    }
    return base;
  };

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(full), static_cast<Eigen::Index>(full));
  for (std::size_t r = 0; r < full; ++r) {
    const std::size_t lr = local_index(r);
    for (std::size_t lc = 0; lc < local; ++lc) {
      const Complex v = op(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
      if (v != Complex{}) {
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(with_local(r, lc))) = v;
      }
    }
  }
  return out;
}

QuantumNetwork::QuantumNetwork(std::size_t n_subsystems, std::size_t subsystem_dim,
                               std::vector<Matrix> fixed_unitaries, std::vector<BlackBox> boxes)
    : n_subsystems_(n_subsystems),
      subsystem_dim_(subsystem_dim),
      dim_(0),
      fixed_(std::move(fixed_unitaries)),
      boxes_(std::move(boxes)) {
  if (n_subsystems_ < 1 || subsystem_dim_ < 1) {
    throw ValidationError("QuantumNetwork: needs at least one subsystem of dimension >= 1");
  }
  dim_ = checked_power(subsystem_dim_, n_subsystems_);
  if (fixed_.size() != boxes_.size() + 1) {
    throw ValidationError("QuantumNetwork: expected Q + 1 fixed unitaries around Q boxes");
  }
  for (std::size_t j = 0; j < fixed_.size(); ++j) {
    const auto& v = fixed_[j];
    if (static_cast<std::size_t>(v.rows()) != dim_ || static_cast<std::size_t>(v.cols()) != dim_) {
      std::ostringstream msg;
      msg << "QuantumNetwork: V_" << j << " has the wrong dimension";
      throw UsageError(msg.str());
    }
    if (unitarity_defect(v) > 1e-10) {
      std::ostringstream msg;
      msg << "QuantumNetwork: V_" << j << " is not unitary";
      throw ValidationError(msg.str());
    }
  }
  embedded_.reserve(boxes_.size());
  spectra_.reserve(boxes_.size());
  for (const auto& box : boxes_) {
    embedded_.emplace_back(embed_operator(box.generator().matrix(), box.target_subsystems(),
                                          n_subsystems_, subsystem_dim_));
    spectra_.push_back(hermitian_eigensystem(embedded_.back()));
  }
}

QuantumNetwork QuantumNetwork::parallel(std::size_t n_subsystems, std::size_t subsystem_dim,
                                        std::vector<BlackBox> boxes) {
  const auto dim = static_cast<Eigen::Index>(checked_power(subsystem_dim, n_subsystems));
  std::vector<Matrix> fixed(boxes.size() + 1, Matrix::Identity(dim, dim));
  return QuantumNetwork(n_subsystems, subsystem_dim, std::move(fixed), std::move(boxes));
}

QuantumNetwork QuantumNetwork::with_fixed_unitaries(std::vector<Matrix> fixed_unitaries) const {
  return QuantumNetwork(n_subsystems_, subsystem_dim_, std::move(fixed_unitaries), boxes_);
}

Matrix QuantumNetwork::box_unitary(std::size_t j, double phi) const {
  return evolution_unitary(spectra_.at(j), phi);
}

std::size_t query_count(const QuantumNetwork& net) { return net.boxes().size(); }

Matrix network_unitary(const QuantumNetwork& net, double phi) {
  Matrix u = net.fixed_unitaries().front();
  for (std::size_t j = 0; j < net.boxes().size(); ++j) {
    u = (net.fixed_unitaries()[j + 1] * (net.box_unitary(j, phi) * u)).eval();
  }
  if (unitarity_defect(u) > 1e-9) {
    throw NumericalIntegrityError("network_unitary: product lost unitarity");
  }
  return u;
}

namespace {

Matrix central_difference_generator(const QuantumNetwork& net, double phi, double eps,
                                    const Matrix& u_adjoint) {
  const Matrix du = (network_unitary(net, phi + eps) - network_unitary(net, phi - eps)) / (2.0 * eps);
  return Complex(0.0, 1.0) * du * u_adjoint;
}

}  // namespace

HermitianOperator generator_numeric(const QuantumNetwork& net, double phi,
                                    const NumericGeneratorOptions& options) {
  const double eps = options.eps;
  if (!(eps > 0.0) || eps > 1e-3) {
    throw UsageError("generator_numeric: eps must lie in (0, 1e-3]");
  }
  const Matrix u_adjoint = network_unitary(net, phi).adjoint();
  Matrix g = central_difference_generator(net, phi, eps, u_adjoint);
  if (options.richardson) {
    const Matrix half = central_difference_generator(net, phi, 0.5 * eps, u_adjoint);
    g = (4.0 * half - g) / 3.0;
  }

  // Truncation error grows with the cube of the total spectral width; the
  // second term is the cancellation floor of the difference quotient.
  double width = 0.0;
  for (const auto& box : net.boxes()) width += box.seminorm();
  const double scale = std::max(1.0, width * width * width);
  const double bound = 10.0 * eps * eps * scale +
                       16.0 * static_cast<double>(net.dim()) * DBL_EPSILON / eps;
  const double residue = (0.5 * (g - g.adjoint())).cwiseAbs().maxCoeff();
  if (residue > bound) {
    std::ostringstream msg;
    msg << "generator_numeric: anti-Hermitian residue " << residue << " exceeds " << bound
        << "; retry with eps = " << eps / 10.0;
    throw StepSizeError(msg.str(), eps / 10.0);
  }
  return HermitianOperator(0.5 * (g + g.adjoint()), std::max(kDefaultHermitianTol, 2.0 * bound));
}

GeneratorTerms generator_analytic(const QuantumNetwork& net, double phi) {
  const std::size_t q = query_count(net);
  const auto dim = static_cast<Eigen::Index>(net.dim());
  std::vector<HermitianOperator> terms;
  terms.reserve(q);

  // after = V_Q O ... O V_j, built from the output side inward.
  Matrix after = net.fixed_unitaries().back();
  std::vector<Matrix> conj(q);
  for (std::size_t j = q; j-- > 0;) {
    conj[j] = after;
    after = (after * net.box_unitary(j, phi) * net.fixed_unitaries()[j]).eval();
  }
  Matrix total = Matrix::Zero(dim, dim);
  for (std::size_t j = 0; j < q; ++j) {
    terms.push_back(net.embedded_generator(j).conjugated(conj[j]));
    total += terms.back().matrix();
  }
  return GeneratorTerms{HermitianOperator(std::move(total)), std::move(terms)};
}

}  // namespace qmetro
