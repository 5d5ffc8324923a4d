#include "qmetro/opalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qmetro/error.hpp"

namespace qmetro {

void check_dimension(std::size_t dim, const char* what) {
  if (dim < 1) {
    throw ValidationError(std::string(what) + ": dimension must be at least 1");
  }
  if (dim > kMaxDimension) {
    std::ostringstream msg;
    msg << what << ": dimension " << dim << " exceeds the cap of " << kMaxDimension
        << " (at most 12 qubits)";
    throw ValidationError(msg.str());
  }
}

HermitianOperator::HermitianOperator(Matrix entries, double hermitian_tol)
    : entries_(std::move(entries)), hermitian_tol_(hermitian_tol) {
  if (entries_.rows() != entries_.cols()) {
    throw ValidationError("HermitianOperator: matrix is not square");
  }
  check_dimension(static_cast<std::size_t>(entries_.rows()), "HermitianOperator");
  if (!entries_.allFinite()) {
    throw ValidationError("HermitianOperator: non-finite entry");
  }
  const double defect = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (defect > hermitian_tol_) {
    std::ostringstream msg;
    msg << "HermitianOperator: |A - A^dagger| = " << defect << " exceeds tolerance "
        << hermitian_tol_;
    throw ValidationError(msg.str());
  }
  // Store the exactly Hermitian part so downstream spectra are real.
  entries_ = (0.5 * (entries_ + entries_.adjoint())).eval();
}

HermitianOperator HermitianOperator::diagonal(std::span<const double> values) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(values.size()),
                          static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
  }
  return HermitianOperator(std::move(m));
}

HermitianOperator HermitianOperator::identity(std::size_t dim) {
  check_dimension(dim, "identity");
  return HermitianOperator(Matrix::Identity(static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim)));
}

bool HermitianOperator::is_diagonal(double tol) const {
  const Eigen::Index n = entries_.rows();
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r != c && std::abs(entries_(r, c)) > tol) return false;
    }
  }
  return true;
}

RealVector HermitianOperator::diagonal_values() const { return entries_.diagonal().real(); }

HermitianOperator HermitianOperator::scaled(double factor) const {
  return HermitianOperator(entries_ * factor, hermitian_tol_);
}

HermitianOperator HermitianOperator::shifted(double offset) const {
  Matrix m = entries_;
  m.diagonal().array() -= offset;
  return HermitianOperator(std::move(m), hermitian_tol_);
}

HermitianOperator HermitianOperator::conjugated(const Matrix& unitary) const {
  if (unitary.rows() != entries_.rows() || unitary.cols() != entries_.cols()) {
    throw UsageError("conjugated: dimension mismatch");
  }
  return HermitianOperator(unitary * entries_ * unitary.adjoint(), hermitian_tol_);
}

HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw UsageError("operator sum: dimension mismatch");
  return HermitianOperator(a.matrix() + b.matrix(), std::max(a.hermitian_tol(), b.hermitian_tol()));
}

PureState::PureState(Vector amplitudes, std::vector<std::string> basis_labels)
    : amplitudes_(std::move(amplitudes)), labels_(std::move(basis_labels)) {
  check_dimension(static_cast<std::size_t>(amplitudes_.size()), "PureState");
  if (!labels_.empty() && labels_.size() != static_cast<std::size_t>(amplitudes_.size())) {
    throw ValidationError("PureState: basis label count does not match dimension");
  }
  const double norm2 = amplitudes_.squaredNorm();
  if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > kNormTol) {
    std::ostringstream msg;
    msg << "PureState: squared norm " << norm2 << " deviates from 1";
    throw ValidationError(msg.str());
  }
}

PureState PureState::normalized(Vector amplitudes, std::vector<std::string> basis_labels) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ValidationError("PureState: cannot normalize a zero or non-finite vector");
  }
  amplitudes /= norm;
  return PureState(std::move(amplitudes), std::move(basis_labels));
}

PureState PureState::basis(std::size_t dim, std::size_t index) {
  check_dimension(dim, "PureState");
  if (index >= dim) throw UsageError("PureState::basis: index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState(std::move(v));
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  const Eigen::Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  Matrix out(ar * br, ac * bc);
  for (Eigen::Index i = 0; i < ar; ++i) {
    for (Eigen::Index j = 0; j < ac; ++j) {
      out.block(i * br, j * bc, br, bc) = a(i, j) * b;
    }
  }
  return out;
}

HermitianOperator tensor_product(const HermitianOperator& a, const HermitianOperator& b) {
  check_dimension(a.dim() * b.dim(), "tensor_product");
  return HermitianOperator(kronecker(a.matrix(), b.matrix()),
                           std::max(a.hermitian_tol(), b.hermitian_tol()));
}

PureState tensor_product(const PureState& a, const PureState& b) {
  check_dimension(a.dim() * b.dim(), "tensor_product");
  const auto na = static_cast<Eigen::Index>(a.dim());
  const auto nb = static_cast<Eigen::Index>(b.dim());
  Vector v(na * nb);
  for (Eigen::Index i = 0; i < na; ++i) v.segment(i * nb, nb) = a.amplitudes()(i) * b.amplitudes();

  std::vector<std::string> labels;
  if (!a.basis_labels().empty() && !b.basis_labels().empty()) {
    labels.reserve(static_cast<std::size_t>(na * nb));
    for (const auto& la : a.basis_labels())
      for (const auto& lb : b.basis_labels()) labels.push_back(la + lb);
  }
  return PureState::normalized(std::move(v), std::move(labels));
}

Operand tensor_product(const Operand& a, const Operand& b) {
  if (a.index() != b.index()) {
    throw UsageError("tensor_product: operands must both be operators or both be states");
  }
  if (const auto* op = std::get_if<HermitianOperator>(&a)) {
    return tensor_product(*op, std::get<HermitianOperator>(b));
  }
  return tensor_product(std::get<PureState>(a), std::get<PureState>(b));
}

Spectrum hermitian_eigensystem(const HermitianOperator& a) {
  const auto n = static_cast<Eigen::Index>(a.dim());
  Spectrum s;
  if (a.is_diagonal()) {
    const RealVector d = a.diagonal_values();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return d(x) < d(y); });
    s.eigenvalues.resize(n);
    s.eigenvectors = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      s.eigenvalues(k) = d(order[static_cast<std::size_t>(k)]);
      s.eigenvectors(order[static_cast<std::size_t>(k)], k) = 1.0;
    }
    return s;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalIntegrityError("hermitian_eigensystem: eigensolver did not converge");
  }
  s.eigenvalues = solver.eigenvalues();
  s.eigenvectors = solver.eigenvectors();
  // Fix the phase of each eigenvector: first entry of maximal modulus is real positive.
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = std::abs(s.eigenvectors(i, k));
      if (m > best + 1e-12) {
        best = m;
        arg = i;
      }
    }
    const Complex z = s.eigenvectors(arg, k);
    s.eigenvectors.col(k) *= std::conj(z) / std::abs(z);
  }
  return s;
}

Matrix evolution_unitary(const Spectrum& spectrum, double phi) {
  const auto n = static_cast<Eigen::Index>(spectrum.dim());
  Vector phases(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    phases(k) = std::polar(1.0, -phi * spectrum.eigenvalues(k));
  }
  return spectrum.eigenvectors * phases.asDiagonal() * spectrum.eigenvectors.adjoint();
}

Matrix evolution_unitary(const HermitianOperator& gen, double phi) {
  return evolution_unitary(hermitian_eigensystem(gen), phi);
}

PureState evolve(const PureState& state, const Spectrum& spectrum, double phi) {
  if (state.dim() != spectrum.dim()) {
    throw UsageError("evolve: state and generator dimensions differ");
  }
  Vector coeff = spectrum.eigenvectors.adjoint() * state.amplitudes();
  for (Eigen::Index k = 0; k < coeff.size(); ++k) {
    coeff(k) *= std::polar(1.0, -phi * spectrum.eigenvalues(k));
  }
  return PureState::normalized(spectrum.eigenvectors * coeff, state.basis_labels());
}

PureState evolve(const PureState& state, const HermitianOperator& gen, double phi) {
  if (state.dim() != gen.dim()) {
    throw UsageError("evolve: state and generator dimensions differ");
  }
  return evolve(state, hermitian_eigensystem(gen), phi);
}

Moments moments(const PureState& state, const HermitianOperator& a) {
  if (state.dim() != a.dim()) throw UsageError("moments: state and operator dimensions differ");
  const Vector& psi = state.amplitudes();
  const Vector a_psi = a.matrix() * psi;
  const Complex mean = psi.dot(a_psi);  // conjugates psi
  if (std::abs(mean.imag()) > 1e-8) {
    std::ostringstream msg;
    msg << "moments: expectation has imaginary part " << mean.imag();
    throw NumericalIntegrityError(msg.str());
  }
  Moments out;
  out.expectation = mean.real();
  // Centered form avoids the cancellation in <A^2> - <A>^2.
  out.variance = (a_psi - out.expectation * psi).squaredNorm();
  return out;
}

double unitarity_defect(const Matrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return (u * u.adjoint() - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::usage: return "usage";
    case ErrorKind::validation: return "validation";
    case ErrorKind::domain: return "domain";
    case ErrorKind::numerical: return "numerical";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse: return 2;
    case ErrorKind::numerical: return 4;
    default: return 3;
  }
}

}  // namespace qmetro
