#pragma once

#include <cstddef>
#include <vector>

#include "qmetro/opalg.hpp"

namespace qmetro {

/// One application of the black box O(phi) = exp(-i phi H) on a subset of
/// the subsystems. H is shifted at construction so that its smallest
/// eigenvalue is zero; the removed offset is kept in shift().
class BlackBox {
 public:
  BlackBox(const HermitianOperator& base_generator, std::vector<std::size_t> target_subsystems);

  const HermitianOperator& generator() const noexcept { return generator_; }
  double shift() const noexcept { return shift_; }
  double seminorm() const noexcept { return seminorm_; }
  std::size_t order() const noexcept { return targets_.size(); }
  const std::vector<std::size_t>& target_subsystems() const noexcept { return targets_; }

 private:
  HermitianOperator generator_;
  double shift_ = 0.0;
  double seminorm_ = 0.0;
  std::vector<std::size_t> targets_;
};

/// Places an operator acting on `targets` (first target most significant)
/// into the full n_subsystems-fold space, padding with identities.
Matrix embed_operator(const Matrix& op, const std::vector<std::size_t>& targets,
                      std::size_t n_subsystems, std::size_t subsystem_dim);

/// U(phi) = V_Q O(phi) ... V_1 O(phi) V_0. fixed_unitaries holds V_0..V_Q,
/// boxes holds the Q black-box placements in application order.
class QuantumNetwork {
 public:
  QuantumNetwork(std::size_t n_subsystems, std::size_t subsystem_dim,
                 std::vector<Matrix> fixed_unitaries, std::vector<BlackBox> boxes);

  // All V_j equal to the identity.
  static QuantumNetwork parallel(std::size_t n_subsystems, std::size_t subsystem_dim,
                                 std::vector<BlackBox> boxes);

  std::size_t n_subsystems() const noexcept { return n_subsystems_; }
  std::size_t subsystem_dim() const noexcept { return subsystem_dim_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Matrix>& fixed_unitaries() const noexcept { return fixed_; }
  const std::vector<BlackBox>& boxes() const noexcept { return boxes_; }
  // Full-space generator of box j.
  const HermitianOperator& embedded_generator(std::size_t j) const { return embedded_[j]; }

  // exp(-i phi H_j) on the full space.
  Matrix box_unitary(std::size_t j, double phi) const;

  QuantumNetwork with_fixed_unitaries(std::vector<Matrix> fixed_unitaries) const;

 private:
  std::size_t n_subsystems_;
  std::size_t subsystem_dim_;
  std::size_t dim_;
  std::vector<Matrix> fixed_;
  std::vector<BlackBox> boxes_;
  std::vector<HermitianOperator> embedded_;
  std::vector<Spectrum> spectra_;
};

std::size_t query_count(const QuantumNetwork& net);

Matrix network_unitary(const QuantumNetwork& net, double phi);

inline constexpr double kDefaultGeneratorEps = 1e-6;

struct NumericGeneratorOptions {
  double eps = kDefaultGeneratorEps;
  bool richardson = false;
};

/// i [U(phi + eps) - U(phi - eps)] / (2 eps) U^dagger(phi), Hermitized after
/// checking the anti-Hermitian residue.
HermitianOperator generator_numeric(const QuantumNetwork& net, double phi,
                                    const NumericGeneratorOptions& options = {});

struct GeneratorTerms {
  HermitianOperator generator;
  std::vector<HermitianOperator> terms;  // A_1 .. A_Q in box order
};

/// A_j = L_j H_j L_j^dagger with L_j = V_Q O(phi) ... O(phi) V_j, i.e. the
/// part of the network applied after box j.
GeneratorTerms generator_analytic(const QuantumNetwork& net, double phi);

}  // namespace qmetro
