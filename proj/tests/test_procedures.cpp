#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "qmetro/error.hpp"
#include "qmetro/metrology.hpp"
#include "qmetro/procedures.hpp"
#include "qmetro/states.hpp"
#include "test_util.hpp"

using namespace qmetro;
using namespace qmetro::testing;

namespace {

ProcedureSpec make_spec(ProcedureKind kind, std::size_t n, std::size_t k = 1, double lmin = 0.0,
                        double lmax = 1.0) {
  ProcedureSpec s;
  s.kind = kind;
  s.n_systems = n;
  s.body_order = k;
  s.lambda_min = lmin;
  s.lambda_max = lmax;
  return s;
}

// Eigenvalue on a computational basis string: subsets of size k (or every
// nonempty subset) drawn from the bits, each contributing the product of
// per-site eigenvalues. Bit value 1 selects lambda_max.
double enumerate_eigenvalue(std::size_t bits, std::size_t n, ProcedureKind kind, std::size_t k,
                            double lmin, double lmax) {
  double total = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    const auto size = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (kind != ProcedureKind::exponential && size != k) continue;
    double prod = 1.0;
    for (std::size_t site = 0; site < n; ++site) {
      if ((mask >> site) & 1U) prod *= ((bits >> site) & 1U) ? lmax : lmin;
    }
    total += prod;
  }
  return total;
}

double offdiagonal_mass(const Matrix& m) {
  Matrix off = m;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("linear generator on three qubits") {
  const auto g = build_generator(make_spec(ProcedureKind::linear, 3));
  CHECK(g.query_complexity() == 3);
  std::map<double, int> degeneracy;
  for (double v : g.spectrum().eigenvalues) ++degeneracy[v];
  CHECK(degeneracy == std::map<double, int>{{0.0, 1}, {1.0, 3}, {2.0, 3}, {3.0, 1}});
}

TEST_CASE("linear generator with a symmetric base") {
  const auto g = build_generator(make_spec(ProcedureKind::linear, 4, 1, -0.5, 0.5));
  CHECK(g.h_max() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g.h_min() == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(g.query_complexity() == 4);
  const auto one = build_generator(make_spec(ProcedureKind::linear, 1));
  CHECK(max_abs_diff(one.generator().matrix(), HermitianOperator::diagonal(std::vector{0.0, 1.0}).matrix()) == 0.0);
}

TEST_CASE("two-body generator examples") {
  const auto g = build_generator(make_spec(ProcedureKind::kbody, 3, 2));
  CHECK(g.query_complexity() == 3);
  const RealVector d = g.generator().diagonal_values();
  for (std::size_t bits = 0; bits < 8; ++bits) {
    const auto w = static_cast<double>(__builtin_popcountll(bits));
    CHECK(d(static_cast<Eigen::Index>(bits)) == w * (w - 1) / 2);
  }
  const auto pair = build_generator(make_spec(ProcedureKind::kbody, 2, 2));
  CHECK(pair.query_complexity() == 1);
  CHECK(max_abs_diff(pair.generator().matrix(), HermitianOperator::diagonal(std::vector{0.0, 0.0, 0.0, 1.0}).matrix()) == 0.0);
}

TEST_CASE("self pairs add the diagonal terms of the double sum") {
  auto spec = make_spec(ProcedureKind::kbody, 3, 2);
  spec.include_self_pairs = true;
  const auto g = build_generator(spec);
  const RealVector d = g.generator().diagonal_values();
  for (std::size_t bits = 0; bits < 8; ++bits) {
    const auto w = static_cast<double>(__builtin_popcountll(bits));
    CHECK(d(static_cast<Eigen::Index>(bits)) == w * (w - 1) / 2 + w);
  }
  const auto e = closed_form_extremes(spec);
  CHECK(e.h_max == g.h_max());
}

TEST_CASE("body order above N is a usage error and k > N/2 is flagged") {
  CHECK_THROWS_AS(build_generator(make_spec(ProcedureKind::kbody, 2, 3)), UsageError);
  const auto g = build_generator(make_spec(ProcedureKind::kbody, 4, 3));
  CHECK(std::find(g.warnings().begin(), g.warnings().end(), "k_exceeds_half_n") != g.warnings().end());
  CHECK(build_generator(make_spec(ProcedureKind::kbody, 4, 2)).warnings().empty());
}

TEST_CASE("exponential generator examples") {
  const auto g = build_generator(make_spec(ProcedureKind::exponential, 3));
  CHECK(g.query_complexity() == 7);
  CHECK(g.h_max() == 7.0);
  const RealVector d = g.generator().diagonal_values();
  for (std::size_t bits = 0; bits < 8; ++bits) {
    CHECK(d(static_cast<Eigen::Index>(bits)) == std::exp2(__builtin_popcountll(bits)) - 1);
  }
  const auto one = build_generator(make_spec(ProcedureKind::exponential, 1));
  CHECK(max_abs_diff(one.generator().matrix(), build_generator(make_spec(ProcedureKind::linear, 1)).generator().matrix()) == 0.0);
  CHECK_THROWS_AS(build_generator(make_spec(ProcedureKind::exponential, 11)), ValidationError);
}

TEST_CASE("sequential repetitions scale generator and query count") {
  const auto qubit = build_generator(make_spec(ProcedureKind::linear, 1));
  const auto five = sequential_wrap(qubit, 5);
  CHECK(five.query_complexity() == 5);
  CHECK(max_abs_diff(five.generator().matrix(), HermitianOperator::diagonal(std::vector{0.0, 5.0}).matrix()) == 0.0);
  const auto same = sequential_wrap(qubit, 1);
  CHECK(max_abs_diff(same.generator().matrix(), qubit.generator().matrix()) == 0.0);

  auto spec = make_spec(ProcedureKind::sequential, 2);
  spec.repetitions = 2;
  const auto g = build_generator(spec);
  CHECK(g.h_max() == 4.0);
  CHECK(g.query_complexity() == 4);
}

TEST_CASE("query complexity formulas are exact") {
  for (std::size_t n = 1; n <= 10; ++n) {
    CHECK(query_complexity(make_spec(ProcedureKind::linear, n)) == n);
    CHECK(query_complexity(make_spec(ProcedureKind::exponential, n)) == (std::uint64_t{1} << n) - 1);
    for (std::size_t k = 1; k <= n; ++k) {
      // Pascal-triangle oracle
      std::vector<std::uint64_t> row{1};
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::uint64_t> next(row.size() + 1, 1);
        for (std::size_t j = 1; j < row.size(); ++j) next[j] = row[j - 1] + row[j];
        row = next;
      }
      CHECK(query_complexity(make_spec(ProcedureKind::kbody, n, k)) == row[k]);
    }
    for (std::size_t t = 1; t <= 4; ++t) {
      auto spec = make_spec(ProcedureKind::sequential, n);
      spec.repetitions = t;
      spec.inner_kind = ProcedureKind::exponential;
      CHECK(query_complexity(spec) == t * ((std::uint64_t{1} << n) - 1));
    }
  }
  CHECK(binomial(64, 32) == 1832624140942590534ULL);
}

TEST_CASE("closed form extremes examples") {
  const auto lin = closed_form_extremes(make_spec(ProcedureKind::linear, 4, 1, -0.5, 0.5));
  CHECK(lin.q == 4);
  CHECK(lin.h_min == -2.0);
  CHECK(lin.h_max == 2.0);
  const auto kb = closed_form_extremes(make_spec(ProcedureKind::kbody, 5, 2));
  CHECK(kb.q == 10);
  CHECK(kb.h_min == 0.0);
  CHECK(kb.h_max == 10.0);
  const auto ex = closed_form_extremes(make_spec(ProcedureKind::exponential, 3));
  CHECK(ex.q == 7);
  CHECK(ex.h_min == 0.0);
  CHECK(ex.h_max == 7.0);
  CHECK_THROWS_AS(closed_form_extremes(make_spec(ProcedureKind::kbody, 4, 2, -0.5, 0.5)), DomainError);
  CHECK_THROWS_AS(closed_form_extremes(make_spec(ProcedureKind::exponential, 4, 1, -0.5, 0.5)), DomainError);
}

TEST_CASE("constructed extremes match closed forms and subset enumeration") {
  const std::vector<std::pair<double, double>> bases{{0.0, 1.0}, {0.25, 1.5}, {0.5, 0.75}};
  for (const auto& [lmin, lmax] : bases) {
    for (std::size_t n = 1; n <= 8; ++n) {
      std::vector<ProcedureSpec> specs{make_spec(ProcedureKind::linear, n, 1, lmin, lmax),
                                       make_spec(ProcedureKind::exponential, n, 1, lmin, lmax)};
      for (std::size_t k = 1; k <= std::min<std::size_t>(4, n); ++k) {
        specs.push_back(make_spec(ProcedureKind::kbody, n, k, lmin, lmax));
      }
      for (const auto& spec : specs) {
        const auto g = build_generator(spec);
        const auto e = closed_form_extremes(spec);
        CHECK(g.query_complexity() == e.q);
        CHECK(std::abs(g.h_min() - e.h_min) <= 1e-9);
        CHECK(std::abs(g.h_max() - e.h_max) <= 1e-9);
        const RealVector d = g.generator().diagonal_values();
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
          // Basis index most significant = site 0; popcount symmetry makes the
          // site order irrelevant for the oracle value.
          const double v = enumerate_eigenvalue(bits, n, spec.kind, spec.body_order, lmin, lmax);
          CHECK(std::abs(d(static_cast<Eigen::Index>(bits)) - v) <= 1e-9);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        CHECK(std::abs(e.h_min - lo) <= 1e-9);
        CHECK(std::abs(e.h_max - hi) <= 1e-9);
      }
    }
  }
}

TEST_CASE("dense and diagonal construction paths agree") {
  for (std::size_t n = 1; n <= 5; ++n) {
    std::vector<ProcedureSpec> specs{make_spec(ProcedureKind::linear, n),
                                     make_spec(ProcedureKind::exponential, n, 1, 0.2, 0.9)};
    for (std::size_t k = 1; k <= n; ++k) specs.push_back(make_spec(ProcedureKind::kbody, n, k, 0.1, 1.0));
    for (const auto& spec : specs) {
      const auto diag = build_generator(spec);
      const auto dense = build_generator(spec, {true});
      CHECK(max_abs_diff(diag.generator().matrix(), dense.generator().matrix()) <= 1e-12);
    }
  }
}

TEST_CASE("rotated bases give unitarily conjugated generators") {
  std::mt19937_64 rng(41);
  for (ProcedureKind kind : {ProcedureKind::linear, ProcedureKind::kbody, ProcedureKind::exponential}) {
    const std::size_t n = 3;
    auto plain = make_spec(kind, n, 2, 0.0, 1.0);
    const Matrix w = random_unitary(2, rng);
    auto rotated = plain;
    rotated.base_operator = HermitianOperator::diagonal(std::vector{0.0, 1.0}).conjugated(w);
    Matrix big = Matrix::Identity(1, 1);
    for (std::size_t i = 0; i < n; ++i) big = kronecker(big, w);
    const Matrix expect = big * build_generator(plain).generator().matrix() * big.adjoint();
    CHECK(max_abs_diff(build_generator(rotated).generator().matrix(), expect) <= 1e-12);
  }
}

TEST_CASE("generators from diagonal bases are diagonal") {
  for (std::size_t n = 1; n <= 6; ++n) {
    for (const auto& spec : {make_spec(ProcedureKind::linear, n), make_spec(ProcedureKind::kbody, n, 1 + n / 2),
                             make_spec(ProcedureKind::exponential, n)}) {
      CHECK(offdiagonal_mass(build_generator(spec).generator().matrix()) <= 1e-12);
    }
  }
}

TEST_CASE("shot-noise baseline examples") {
  const auto four = snl_baseline(make_spec(ProcedureKind::linear, 4));
  CHECK(four.delta_h_separable == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(four.snl_bound == doctest::Approx(0.5).epsilon(1e-14));
  const auto one = snl_baseline(make_spec(ProcedureKind::linear, 1));
  CHECK(one.delta_h_separable == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(one.snl_bound == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(snl_baseline(make_spec(ProcedureKind::linear, 100)).snl_bound == doctest::Approx(0.1).epsilon(1e-14));
  CHECK_THROWS_AS(snl_baseline(make_spec(ProcedureKind::kbody, 4, 2)), DomainError);
}

TEST_CASE("separable linear deviation grows as the square root of N") {
  const std::vector<std::size_t> ns{2, 4, 8, 16, 32};
  std::vector<double> x, y;
  for (auto n : ns) {
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(std::log(snl_baseline(make_spec(ProcedureKind::linear, n)).delta_h_separable));
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / 5;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / 5;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  CHECK(std::abs(sxy / sxx - 0.5) <= 1e-6);
}

TEST_CASE("weight spectrum reproduces the dense diagonal") {
  for (std::size_t n = 1; n <= 7; ++n) {
    std::vector<ProcedureSpec> specs{make_spec(ProcedureKind::linear, n, 1, 0.3, 1.2),
                                     make_spec(ProcedureKind::exponential, n, 1, 0.3, 1.2)};
    for (std::size_t k = 1; k <= n; ++k) specs.push_back(make_spec(ProcedureKind::kbody, n, k, 0.3, 1.2));
    for (const auto& spec : specs) {
      const auto ws = weight_spectrum(spec);
      const RealVector d = build_generator(spec).generator().diagonal_values();
      for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
        const auto w = static_cast<std::size_t>(__builtin_popcountll(bits));
        CHECK(std::abs(d(static_cast<Eigen::Index>(bits)) - ws.value_by_weight[w]) <= 1e-9);
      }
      CHECK(ws.query_complexity == query_complexity(spec));
    }
  }
}

TEST_CASE("query constants") {
  CHECK(query_constant(make_spec(ProcedureKind::linear, 3, 1, 0.0, 2.0)) == 0.5);
  CHECK(query_constant(make_spec(ProcedureKind::kbody, 3, 2, 0.0, 2.0)) == 0.25);
  CHECK(query_constant(make_spec(ProcedureKind::exponential, 5)) == 1.0);
  const auto g = build_generator(make_spec(ProcedureKind::exponential, 4));
  CHECK(g.query_constant() == 1.0);
}

TEST_CASE("procedure networks reproduce the joint generators") {
  for (const auto& spec : {make_spec(ProcedureKind::linear, 3), make_spec(ProcedureKind::kbody, 3, 2),
                           make_spec(ProcedureKind::exponential, 3)}) {
    const auto net = procedure_network(spec);
    CHECK(query_count(net) == query_complexity(spec));
    const auto g = network_generator(net, 0.7);
    CHECK(max_abs_diff(g.generator().matrix(), build_generator(spec).generator().matrix()) <= 1e-12);
    CHECK(g.query_complexity() == query_complexity(spec));
  }
}

TEST_CASE("invalid procedure specs") {
  CHECK_THROWS_AS(make_spec(ProcedureKind::linear, 0).validate(), ValidationError);
  CHECK_THROWS_AS(make_spec(ProcedureKind::linear, 2, 1, 1.0, 1.0).validate(), ValidationError);
  CHECK_THROWS_AS(procedure_kind_from_string("quadratic"), ValidationError);
  CHECK(procedure_kind_from_string("kbody") == ProcedureKind::kbody);
  CHECK_THROWS_AS(build_generator(make_spec(ProcedureKind::linear, 13)), ValidationError);
  CHECK_THROWS_AS(linear_generator(make_spec(ProcedureKind::kbody, 3, 2)), UsageError);
}
