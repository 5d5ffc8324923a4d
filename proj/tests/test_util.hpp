#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "qmetro/opalg.hpp"

namespace qmetro::testing {

inline Matrix random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = Complex(nd(rng), nd(rng));
  return m;
}

inline HermitianOperator random_hermitian(std::size_t n, std::mt19937_64& rng) {
  const Matrix m = random_matrix(n, rng);
  return HermitianOperator(0.5 * (m + m.adjoint()));
}

// Haar-like unitary from the QR factorization of a complex Gaussian matrix.
inline Matrix random_unitary(std::size_t n, std::mt19937_64& rng) {
  const Matrix m = random_matrix(n, rng);
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const Complex d = r(k, k);
    q.col(k) *= d / std::abs(d);
  }
  return q;
}

inline PureState random_state(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(nd(rng), nd(rng));
  return PureState::normalized(v);
}

template <typename A, typename B>
double max_abs_diff(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Positive 2x2 generator M M^dagger rescaled so the top eigenvalue is 1.
inline HermitianOperator random_positive_qubit(std::mt19937_64& rng) {
  const Matrix m = random_matrix(2, rng);
  const Matrix h = m * m.adjoint();
  return HermitianOperator(h / hermitian_eigensystem(HermitianOperator(h)).eigenvalues.maxCoeff());
}

}  // namespace qmetro::testing
