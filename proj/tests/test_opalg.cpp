#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "qmetro/error.hpp"
#include "qmetro/opalg.hpp"
#include "test_util.hpp"

using namespace qmetro;
using namespace qmetro::testing;

namespace {

const std::vector<double> kQubit{0.0, 1.0};

// Characteristic polynomial by Faddeev-LeVerrier, coefficients c[0..n] of
// det(lambda I - A), then real roots by sign-change scan plus bisection.
std::vector<double> charpoly_roots(const Matrix& a) {
  const auto n = a.rows();
  std::vector<std::complex<long double>> c(static_cast<std::size_t>(n + 1));
  c[static_cast<std::size_t>(n)] = 1.0L;
  Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic> al = a.cast<std::complex<long double>>();
  Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic> mk =
      Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    mk = al * mk;
    mk.diagonal().array() += c[static_cast<std::size_t>(n - k + 1)];
    c[static_cast<std::size_t>(n - k)] = -(al * mk).trace() / static_cast<long double>(k);
  }
  auto p = [&](long double x) {
    long double acc = 0.0L;
    for (Eigen::Index i = n; i >= 0; --i) acc = acc * x + c[static_cast<std::size_t>(i)].real();
    return acc;
  };
  long double radius = 0.0L;
  for (Eigen::Index r = 0; r < n; ++r) radius = std::max(radius, static_cast<long double>(a.row(r).cwiseAbs().sum()));
  std::vector<double> roots;
  const int steps = 400000;
  long double x0 = -radius - 1.0L, p0 = p(x0);
  for (int s = 1; s <= steps; ++s) {
    const long double x1 = -radius - 1.0L + (2.0L * radius + 2.0L) * s / steps;
    const long double p1 = p(x1);
    if ((p0 < 0) != (p1 < 0)) {
      long double lo = x0, hi = x1, plo = p0;
      for (int it = 0; it < 200; ++it) {
        const long double mid = 0.5L * (lo + hi);
        const long double pm = p(mid);
        if ((pm < 0) == (plo < 0)) {
          lo = mid;
          plo = pm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(static_cast<double>(0.5L * (lo + hi)));
    }
    x0 = x1;
    p0 = p1;
  }
  return roots;
}

}  // namespace

TEST_CASE("tensor product follows the most-significant-left convention") {
  const auto q = HermitianOperator::diagonal(kQubit);
  const auto qq = tensor_product(q, q);
  CHECK(qq.dim() == 4);
  CHECK(max_abs_diff(qq.matrix(), HermitianOperator::diagonal(std::vector{0.0, 0.0, 0.0, 1.0}).matrix()) == 0.0);

  std::mt19937_64 rng(11);
  const auto a = random_hermitian(3, rng);
  const auto block = tensor_product(HermitianOperator::identity(2), a);
  CHECK(max_abs_diff(block.matrix().topLeftCorner(3, 3), a.matrix()) == 0.0);
  CHECK(max_abs_diff(block.matrix().bottomRightCorner(3, 3), a.matrix()) == 0.0);
  CHECK(block.matrix().topRightCorner(3, 3).cwiseAbs().maxCoeff() == 0.0);

  const auto ket = tensor_product(PureState::basis(2, 0), PureState::basis(2, 1));
  CHECK(ket.dim() == 4);
  CHECK(ket.amplitude(1) == Complex(1.0, 0.0));
}

TEST_CASE("tensor product rejects mixed operand kinds") {
  const Operand op = HermitianOperator::identity(2);
  const Operand st = PureState::basis(2, 0);
  CHECK_THROWS_AS(tensor_product(op, st), UsageError);
  CHECK(std::holds_alternative<PureState>(tensor_product(st, st)));
}

TEST_CASE("tensor product preserves hermiticity") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = tensor_product(random_hermitian(3, rng), random_hermitian(2, rng));
    CHECK(max_abs_diff(t.matrix(), t.matrix().adjoint()) <= 1e-12);
  }
}

TEST_CASE("operators above the dimension cap are rejected") {
  CHECK_THROWS_AS(HermitianOperator::identity(kMaxDimension + 1), ValidationError);
  const auto big = HermitianOperator::identity(65);  // 65^2 > 4096
  CHECK_NOTHROW(tensor_product(HermitianOperator::identity(64), HermitianOperator::identity(64)));
  CHECK_THROWS_AS(tensor_product(big, big), ValidationError);
}

TEST_CASE("non-hermitian input is a validation error") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianOperator{m}, ValidationError);
  m(1, 0) = 1.0 + 1e-10;  // within the default tolerance
  CHECK_NOTHROW(HermitianOperator{m});
}

TEST_CASE("eigensystem of small standard operators") {
  const auto s = hermitian_eigensystem(HermitianOperator::diagonal(kQubit));
  CHECK(s.eigenvalues(0) == 0.0);
  CHECK(s.eigenvalues(1) == 1.0);

  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  const auto sx = hermitian_eigensystem(HermitianOperator(x));
  CHECK(sx.eigenvalues(0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(sx.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("degenerate diagonal eigenvalues keep index order") {
  const auto s = hermitian_eigensystem(HermitianOperator::diagonal(std::vector{2.0, 1.0, 2.0, 1.0}));
  CHECK(s.eigenvectors(1, 0) == Complex(1.0));
  CHECK(s.eigenvectors(3, 1) == Complex(1.0));
  CHECK(s.eigenvectors(0, 2) == Complex(1.0));
  CHECK(s.eigenvectors(2, 3) == Complex(1.0));
}

TEST_CASE("random 8x8 eigenvalues agree with characteristic polynomial roots") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_hermitian(8, rng);
    const auto s = hermitian_eigensystem(a);
    const auto roots = charpoly_roots(a.matrix());
    REQUIRE(roots.size() == 8);
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(std::abs(s.eigenvalues(static_cast<Eigen::Index>(k)) - roots[k]) <= 1e-8);
    }
    // Ascending, orthonormal, reconstructs the operator.
    CHECK(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
    CHECK(max_abs_diff(s.eigenvectors.adjoint() * s.eigenvectors, Matrix::Identity(8, 8)) <= 1e-10);
    const Matrix rebuilt = s.eigenvectors * s.eigenvalues.cast<Complex>().asDiagonal() * s.eigenvectors.adjoint();
    CHECK(max_abs_diff(rebuilt, a.matrix()) <= 1e-10);
  }
}

TEST_CASE("evolve imprints phases on eigenstates") {
  const auto h = HermitianOperator::diagonal(kQubit);
  const double phi = 0.73;
  const auto out = evolve(PureState::basis(2, 1), h, phi);
  CHECK(std::abs(out.amplitude(1) - std::polar(1.0, -phi)) <= 1e-15);
  CHECK(std::abs(out.amplitude(0)) == 0.0);

  std::mt19937_64 rng(3);
  const auto psi = random_state(4, rng);
  const auto g = random_hermitian(4, rng);
  CHECK(max_abs_diff(evolve(psi, g, 0.0).amplitudes(), psi.amplitudes()) <= 1e-14);
}

TEST_CASE("evolve of the balanced qubit by pi flips the relative sign") {
  // exp(-i pi diag(0,1)) = diag(1, -1) by direct evaluation of the 2x2 exponential.
  const double r = 1.0 / std::sqrt(2.0);
  const auto plus = PureState(Vector{{Complex(r), Complex(r)}});
  const auto out = evolve(plus, HermitianOperator::diagonal(kQubit), std::numbers::pi);
  CHECK(std::abs(out.amplitude(0) - r) <= 1e-15);
  CHECK(std::abs(out.amplitude(1) + r) <= 1e-15);
}

TEST_CASE("evolve preserves norm and composes additively") {
  std::mt19937_64 rng(17);
  const auto psi = random_state(6, rng);
  const auto g = random_hermitian(6, rng);
  for (int i = 0; i < 64; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / 64.0;
    CHECK(std::abs(evolve(psi, g, phi).amplitudes().squaredNorm() - 1.0) <= 1e-12);
  }
  const auto rebuilt = evolve(evolve(psi, g, 0.4), g, 1.1);
  CHECK(max_abs_diff(rebuilt.amplitudes(), evolve(psi, g, 1.5).amplitudes()) <= 1e-10);
  CHECK_THROWS_AS(evolve(psi, HermitianOperator::identity(2), 0.1), UsageError);
}

TEST_CASE("moments of two-level states") {
  const auto h = HermitianOperator::diagonal(kQubit);
  const double r = 1.0 / std::sqrt(2.0);
  const auto bal = moments(PureState(Vector{{Complex(r), Complex(r)}}), h);
  CHECK(bal.expectation == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(bal.variance == doctest::Approx(0.25).epsilon(1e-15));

  const auto ground = moments(PureState::basis(2, 0), h);
  CHECK(ground.expectation == 0.0);
  CHECK(ground.variance == 0.0);

  // mu-superposition with mu = 1/4
  const auto mu = moments(PureState(Vector{{Complex(std::sqrt(0.75)), Complex(0.5)}}), h);
  CHECK(mu.expectation == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(mu.variance == doctest::Approx(0.1875).epsilon(1e-15));
}

TEST_CASE("variance matches the spectral-weight formula") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_hermitian(5, rng);
    const auto psi = random_state(5, rng);
    const auto s = hermitian_eigensystem(a);
    const Vector c = s.eigenvectors.adjoint() * psi.amplitudes();
    double mean = 0.0;
    for (Eigen::Index k = 0; k < 5; ++k) mean += std::norm(c(k)) * s.eigenvalues(k);
    double var = 0.0;
    for (Eigen::Index k = 0; k < 5; ++k) var += std::norm(c(k)) * std::pow(s.eigenvalues(k) - mean, 2);
    const auto m = moments(psi, a);
    CHECK(std::abs(m.expectation - mean) <= 1e-10);
    CHECK(std::abs(m.variance - var) <= 1e-10);
  }
  CHECK_THROWS_AS(moments(PureState::basis(3, 0), HermitianOperator::identity(2)), UsageError);
}

TEST_CASE("pure states must be normalized") {
  CHECK_THROWS_AS(PureState(Vector{{Complex(1.0), Complex(1.0)}}), ValidationError);
  CHECK_THROWS_AS(PureState::normalized(Vector::Zero(3)), ValidationError);
}
