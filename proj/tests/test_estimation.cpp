#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qmetro/error.hpp"
#include "qmetro/estimation.hpp"
#include "qmetro/procedures.hpp"
#include "qmetro/states.hpp"

using namespace qmetro;

namespace {

Povm computational_povm(std::size_t dim) {
  Povm out;
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> d(dim, 0.0);
    d[i] = 1.0;
    out.push_back(HermitianOperator::diagonal(d));
  }
  return out;
}

TrialConfig noon_config(std::uint64_t seed) {
  TrialConfig c;
  c.phi_true = 0.4;
  c.shots_per_trial = 1000;
  c.n_trials = 200;
  c.rng_seed = seed;
  c.povm = noon_povm(3);
  c.search_interval = {0.05, 1.0};
  return c;
}

JointGenerator noon_generator() { return JointGenerator(mode_number_operator(3, 0), 3, 1.0); }

}  // namespace

TEST_CASE("stream seeds are reproducible and distinct") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(stream_seed(7, 0) == stream_seed(7, 0));
  CHECK(stream_seed(7, 0) != stream_seed(7, 1));
  CHECK(stream_seed(7, 0) != stream_seed(8, 0));
}

TEST_CASE("eigenstates give deterministic outcomes") {
  const auto counts = sample_outcomes(PureState::basis(4, 2), computational_povm(4), 500, 1);
  CHECK(counts == Counts{0, 0, 500, 0});
}

TEST_CASE("balanced qubit counts concentrate binomially") {
  const double r = 1 / std::sqrt(2.0);
  const PureState plus(Vector{{Complex(r), Complex(r)}});
  const auto counts = sample_outcomes(plus, computational_povm(2), 1000000, 20241014);
  CHECK(counts[0] + counts[1] == 1000000);
  // 5 sigma with sigma = sqrt(1e6 / 4) = 500
  CHECK(std::abs(static_cast<double>(counts[0]) - 500000.0) <= 2500.0);
  CHECK(sample_outcomes(plus, computational_povm(2), 1000, 5) == sample_outcomes(plus, computational_povm(2), 1000, 5));
  CHECK(sample_outcomes(plus, computational_povm(2), 1000, 5) != sample_outcomes(plus, computational_povm(2), 1000, 6));
}

TEST_CASE("invalid povms are rejected before sampling") {
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = -0.1;
  neg(1, 1) = 0.5;
  const Matrix rest = Matrix::Identity(2, 2) - neg;
  CHECK_THROWS_AS(sample_outcomes(PureState::basis(2, 0), {HermitianOperator(neg), HermitianOperator(rest)}, 10, 1),
                  PovmError);
}

TEST_CASE("mle recovers the phase from exactly matching counts") {
  // cos^2(3 phi / 2) = 3/4 at phi = pi/9
  const ProbabilityModel model = [](double phi) {
    const double c = std::cos(1.5 * phi);
    return std::vector<double>{c * c, 1 - c * c};
  };
  const auto est = mle_estimate({3, 1}, model, {0.05, 1.0});
  CHECK(std::abs(est.phi - std::numbers::pi / 9) <= 1e-6);
  CHECK_FALSE(est.boundary_warning);
}

TEST_CASE("mle is consistent for many shots") {
  const auto gen = mode_number_operator(3, 0);
  const auto state = evolve(noon_state(3), gen, 0.4);
  const auto counts = sample_outcomes(state, noon_povm(3), 100000, 99);
  const ProbabilityModel model = [](double phi) {
    const double c = std::cos(1.5 * phi);
    return std::vector<double>{c * c, 1 - c * c, 0.0};
  };
  const auto est = mle_estimate(counts, model, {0.05, 1.0});
  // sigma = 1 / (3 sqrt(1e5)) ~ 1.05e-3
  CHECK(std::abs(est.phi - 0.4) <= 6e-3);
}

TEST_CASE("symmetric two-peak likelihood resolves to the smaller phase") {
  const ProbabilityModel model = [](double phi) {
    const double s = std::sin(2 * std::numbers::pi * phi);
    return std::vector<double>{0.1 + 0.8 * s * s, 0.9 - 0.8 * s * s};
  };
  const auto est = mle_estimate({10, 0}, model, {0.0, 1.0});
  CHECK(std::abs(est.phi - 0.25) <= 1e-6);
  CHECK_FALSE(est.boundary_warning);
}

TEST_CASE("maximum on the interval edge raises the boundary warning") {
  const ProbabilityModel model = [](double phi) { return std::vector<double>{0.5 + 0.4 * phi, 0.5 - 0.4 * phi}; };
  const auto est = mle_estimate({10, 0}, model, {0.0, 1.0});
  CHECK(est.boundary_warning);
  CHECK(est.phi == 1.0);
}

TEST_CASE("noon trial saturates the Cramer-Rao bound") {
  const auto gen = noon_generator();
  const auto res = precision_trial(gen, noon_state(3), noon_config(20260101));
  CHECK(res.estimates.size() == 200);
  CHECK(std::abs(res.predicted_crb - 1 / (3 * std::sqrt(1000.0))) <= 1e-6);
  const double ratio = res.empirical_rmse / res.predicted_crb;
  CHECK(ratio >= 0.85);
  CHECK(ratio <= 1.25);
  for (double e : res.estimates) {
    CHECK(e >= 0.05);
    CHECK(e <= 1.0);
  }
  CHECK(res.rng_algorithm == kRngAlgorithm);
}

TEST_CASE("separable four-qubit trial saturates the shot-noise prediction") {
  ProcedureSpec spec;
  spec.n_systems = 4;
  const auto gen = build_generator(spec);
  const auto base = hermitian_eigensystem(base_generator(spec));
  const auto site = extreme_pair_povm(base.eigenvectors.col(1), base.eigenvectors.col(0));
  TrialConfig c;
  c.phi_true = 0.4;
  c.shots_per_trial = 1000;
  c.n_trials = 200;
  c.rng_seed = 424242;
  c.povm = product_povm(site, 4);
  c.search_interval = {0.05, 1.2};
  const auto res = precision_trial(gen, product_balanced_state(4, base), c);
  CHECK(std::abs(res.predicted_crb - 1 / std::sqrt(4000.0)) <= 1e-6);
  const double ratio = res.empirical_rmse / res.predicted_crb;
  CHECK(ratio >= 0.85);
  CHECK(ratio <= 1.25);
}

TEST_CASE("halving the gap doubles the error") {
  auto rmse = [](double gap) {
    const JointGenerator g(HermitianOperator::diagonal(std::vector{0.0, gap}), 1, 1 / gap);
    TrialConfig c;
    c.phi_true = 0.8;
    c.shots_per_trial = 1000;
    c.n_trials = 200;
    c.rng_seed = 77;
    c.povm = default_povm(g);
    c.search_interval = {0.1, 2.0};
    return precision_trial(g, optimal_state(g, 0.5), c).empirical_rmse;
  };
  const double ratio = rmse(0.5) / rmse(1.0);
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.4);
}

TEST_CASE("fixed seed reproduces the trial bit for bit, in any worker layout") {
  const auto gen = noon_generator();
  const auto a = precision_trial(gen, noon_state(3), noon_config(5));
  const auto b = precision_trial(gen, noon_state(3), noon_config(5));
  const auto c = precision_trial(gen, noon_state(3), noon_config(5), 4);
  CHECK(a.estimates == b.estimates);
  CHECK(a.estimates == c.estimates);
  CHECK(a.empirical_rmse == c.empirical_rmse);
  CHECK(a.estimates != precision_trial(gen, noon_state(3), noon_config(6)).estimates);
}

TEST_CASE("single shot single trial stays inside the interval") {
  auto config = noon_config(3);
  config.shots_per_trial = 1;
  config.n_trials = 1;
  const auto res = precision_trial(noon_generator(), noon_state(3), config);
  REQUIRE(res.estimates.size() == 1);
  CHECK(res.estimates[0] >= 0.05);
  CHECK(res.estimates[0] <= 1.0);
}

TEST_CASE("trial configuration validation") {
  const auto gen = noon_generator();
  auto outside = noon_config(1);
  outside.phi_true = 1.5;
  CHECK_THROWS_AS(outside.validate(gen), ValidationError);
  auto wide = noon_config(1);
  wide.search_interval = {0.05, 2.2};  // beyond 2 pi / 3
  CHECK_THROWS_AS(wide.validate(gen), ValidationError);
  auto no_shots = noon_config(1);
  no_shots.shots_per_trial = 0;
  CHECK_THROWS_AS(no_shots.validate(gen), ValidationError);
  CHECK_NOTHROW(noon_config(1).validate(gen));
}

TEST_CASE("default povm has the extreme pair and the remainder") {
  ProcedureSpec spec;
  spec.n_systems = 2;
  const auto gen = build_generator(spec);
  const auto povm = default_povm(gen);
  CHECK(povm.size() == 3);
  validate_povm(povm);
  const auto qubit = build_generator(ProcedureSpec{});
  CHECK(default_povm(qubit).size() == 2);
}
