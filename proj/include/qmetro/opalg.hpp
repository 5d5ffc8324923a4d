#pragma once

// Dense complex linear algebra for small Hilbert spaces.
//
// Tensor convention: in a ⊗ b the left operand is the most significant
// factor, so basis index (i, j) of a ⊗ b maps to i * dim(b) + j. Every module
// in the library uses this ordering.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qmetro {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr std::size_t kMaxDimension = 4096;
inline constexpr double kDefaultHermitianTol = 1e-9;
inline constexpr double kNormTol = 1e-12;

void check_dimension(std::size_t dim, const char* what);

class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix entries, double hermitian_tol = kDefaultHermitianTol);

  static HermitianOperator diagonal(std::span<const double> values);
  static HermitianOperator identity(std::size_t dim);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Matrix& matrix() const noexcept { return entries_; }
  double hermitian_tol() const noexcept { return hermitian_tol_; }

  // True when every off-diagonal entry has modulus <= tol.
  bool is_diagonal(double tol = 0.0) const;
  RealVector diagonal_values() const;

  HermitianOperator scaled(double factor) const;
  // this - offset * I
  HermitianOperator shifted(double offset) const;
  HermitianOperator conjugated(const Matrix& unitary) const;

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b);

 private:
  Matrix entries_;
  double hermitian_tol_;
};

class PureState {
 public:
  // Amplitudes must already be normalized to within kNormTol.
  explicit PureState(Vector amplitudes, std::vector<std::string> basis_labels = {});

  // Rescales arbitrary non-zero vectors onto the unit sphere.
  static PureState normalized(Vector amplitudes, std::vector<std::string> basis_labels = {});
  static PureState basis(std::size_t dim, std::size_t index);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
  const Vector& amplitudes() const noexcept { return amplitudes_; }
  Complex amplitude(std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }
  const std::vector<std::string>& basis_labels() const noexcept { return labels_; }

 private:
  Vector amplitudes_;
  std::vector<std::string> labels_;
};

struct Spectrum {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // column k belongs to eigenvalues(k)

  double min() const { return eigenvalues(0); }
  double max() const { return eigenvalues(eigenvalues.size() - 1); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
};

struct Moments {
  double expectation = 0.0;
  double variance = 0.0;
};

HermitianOperator tensor_product(const HermitianOperator& a, const HermitianOperator& b);
PureState tensor_product(const PureState& a, const PureState& b);

using Operand = std::variant<HermitianOperator, PureState>;
// Runtime-typed entry point; throws UsageError on mixed kinds.
Operand tensor_product(const Operand& a, const Operand& b);

Matrix kronecker(const Matrix& a, const Matrix& b);

// Diagonal inputs take an exact path: stable sort, ties keep index order.
Spectrum hermitian_eigensystem(const HermitianOperator& a);

// exp(-i * phi * gen)
Matrix evolution_unitary(const Spectrum& spectrum, double phi);
Matrix evolution_unitary(const HermitianOperator& gen, double phi);

PureState evolve(const PureState& state, const HermitianOperator& gen, double phi);
PureState evolve(const PureState& state, const Spectrum& spectrum, double phi);

Moments moments(const PureState& state, const HermitianOperator& a);

// Largest |U U^dagger - I| entry.
double unitarity_defect(const Matrix& u);

}  // namespace qmetro
