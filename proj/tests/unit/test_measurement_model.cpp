#include <doctest.h>

#include <cmath>
#include <numbers>

#include "collapse/errors.hpp"
#include "collapse/measurement_model.hpp"
#include "support/generators.hpp"

using namespace collapse;
using collapse::testing::random_state;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("correspondence map validation") {
  const auto id = CorrespondenceMap::one_to_one(3);
  CHECK(id.is_one_to_one());
  CHECK(id.combined_dim() == 9);
  CHECK(id.flat_index(2, 1) == 7);
  CHECK(id.weight(1, 1).value() == 1.0);
  CHECK_FALSE(id.weight(1, 0).has_value());

  const CorrespondenceMap multi(2, 3, {{0, 1}, {2}});
  CHECK_FALSE(multi.is_one_to_one());
  CHECK(multi.weight(0, 1).value() == doctest::Approx(0.5));

  CHECK_THROWS_AS(CorrespondenceMap(2, 2, {{0}, {0}}), ValidationError);      // overlap
  CHECK_THROWS_AS(CorrespondenceMap(2, 2, {{0}, {}}), ValidationError);       // empty set
  CHECK_THROWS_AS(CorrespondenceMap(2, 2, {{0}, {2}}), ValidationError);      // out of range
  CHECK_THROWS_AS(CorrespondenceMap(2, 3, {{0, 1}, {2}}, {{0.7, 0.7}, {1.0}}), ValidationError);
  CHECK_THROWS_AS(CorrespondenceMap(2, 3, {{0, 1}, {2}}, {{1.0, 0.0}, {1.0}}), ValidationError);
}

TEST_CASE("born_probabilities") {
  const auto basis = born_probabilities(StateVector({1.0, 0.0}));
  CHECK(basis[0] == 1.0);
  CHECK(basis[1] == 0.0);

  const double h = 1.0 / std::sqrt(2.0);
  const auto phase = born_probabilities(StateVector({Complex(h, 0.0), Complex(0.0, h)}));
  CHECK(phase[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(phase[1] == doctest::Approx(0.5).epsilon(1e-15));

  const auto fig = born_probabilities(StateVector({std::cos(0.37 * kPi), std::sin(0.37 * kPi)}));
  CHECK(fig[0] == doctest::Approx(0.15772644703565564).epsilon(1e-14));
  CHECK(fig[1] == doctest::Approx(0.8422735529643444).epsilon(1e-14));
}

TEST_CASE("born_probabilities sum to one for random states") {
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = born_probabilities(random_state(1 + static_cast<std::size_t>(trial % 7)));
    double s = 0.0;
    for (double v : p) {
      REQUIRE(v >= 0.0);
      s += v;
    }
    REQUIRE(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("born_rate_table examples") {
  const double eps = 1e-4;
  SUBCASE("equal probabilities") {
    const Probabilities p{0.5, 0.5};
    const RateTable r = born_rate_table(p, CorrespondenceMap::one_to_one(2), eps);
    CHECK(r(0, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(r(1, 1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(r(0, 1) == eps);
    CHECK(r(1, 0) == eps);
  }
  SUBCASE("zero-probability aligned entry is floored") {
    const Probabilities p{1.0, 0.0};
    const RateTable r = born_rate_table(p, CorrespondenceMap::one_to_one(2), eps);
    CHECK(r(0, 0) == 1.0);
    CHECK(r(0, 1) == eps);
    CHECK(r(1, 0) == eps);
    CHECK(r(1, 1) == eps);
  }
  SUBCASE("two uniform readings share the outcome probability") {
    const double p = 0.3;
    const Probabilities probs{p, 1.0 - p};
    const RateTable r = born_rate_table(probs, CorrespondenceMap(2, 3, {{0, 1}, {2}}), eps);
    CHECK(r(0, 0) == doctest::Approx(std::sqrt(p / 2)).epsilon(1e-15));
    CHECK(r(0, 1) == doctest::Approx(std::sqrt(p / 2)).epsilon(1e-15));
    CHECK(r(0, 2) == eps);
    CHECK(r(1, 2) == doctest::Approx(std::sqrt(1.0 - p)).epsilon(1e-15));
    CHECK(r(1, 0) == eps);
  }
  SUBCASE("floor at or above a physical rate is a configuration error") {
    const Probabilities p{0.99, 0.01};
    CHECK_THROWS_AS(born_rate_table(p, CorrespondenceMap::one_to_one(2), 0.1), ConfigError);
    CHECK_THROWS_AS(born_rate_table(p, CorrespondenceMap::one_to_one(2), 0.0), ConfigError);
  }
}

TEST_CASE("born_rate_table squares recover the probabilities up to epsilon^2") {
  const double eps = 1e-4;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 4);
    const auto p = born_probabilities(random_state(n));
    double min_p = 1.0;
    for (double v : p) min_p = std::min(min_p, v);
    if (std::sqrt(min_p) <= eps) continue;
    const RateTable r = born_rate_table(p, CorrespondenceMap::one_to_one(n), eps);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        REQUIRE(r(i, j) >= eps);
        s += r(i, j) * r(i, j);
      }
      REQUIRE(std::abs(s - p[i]) <= static_cast<double>(n - 1) * eps * eps * (1 + 1e-9) + 1e-15);
    }
  }
}

TEST_CASE("zeeman_hamiltonian") {
  const double E = 1.7;
  const ComplexMatrix h0 = zeeman_hamiltonian(0.0, E);
  CHECK(h0(0, 0).real() == doctest::Approx(E / 2));
  CHECK(h0(1, 1).real() == doctest::Approx(-E / 2));
  CHECK(std::abs(h0(0, 1)) < 1e-16);

  for (double alpha : {0.0, 0.1, 0.37 * kPi, 0.65 * kPi, 2.0, -1.3}) {
    const ComplexMatrix h = zeeman_hamiltonian(alpha, E);
    const auto ev = hermitian_eigenvalues(h);
    CHECK(ev[0] == doctest::Approx(E / 2).epsilon(1e-14));
    CHECK(ev[1] == doctest::Approx(-E / 2).epsilon(1e-14));
    Eigen::Vector2cd v(std::cos(alpha), std::sin(alpha));
    CHECK((h * v - (E / 2) * v).norm() < 1e-12);
  }
  CHECK_THROWS_AS(zeeman_hamiltonian(0.3, 0.0), ValidationError);
}

TEST_CASE("spin_half_scenario") {
  SUBCASE("basis system state") {
    const auto m = spin_half_scenario(0.0, 0.65 * kPi, 5.0, 1.0);
    CHECK(m.sys()[0] == Complex(1.0));
    CHECK(std::abs(m.sys()[1]) == 0.0);
    CHECK(m.correspondence().is_one_to_one());
  }
  SUBCASE("equal superposition") {
    const auto m = spin_half_scenario(kPi / 4, 0.65 * kPi, 5.0, 1.0);
    CHECK(m.sys()[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(m.sys()[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  }
  SUBCASE("figure scenario") {
    const auto m = spin_half_scenario(0.37 * kPi, 0.65 * kPi, 5.0, 1.0);
    CHECK(m.gamma() == 5.0);
    CHECK(m.epsilon() == kDefaultEpsilon);
    CHECK(m.combined_dim() == 4);
    const auto p = m.probabilities();
    CHECK(p[0] == doctest::Approx(0.15772644703565564).epsilon(1e-14));
    const RateTable r = m.rates();
    CHECK(r.flat(0) == doctest::Approx(std::sqrt(p[0])).epsilon(1e-15));
    CHECK(r.flat(3) == doctest::Approx(std::sqrt(p[1])).epsilon(1e-15));
    CHECK(r.flat(1) == kDefaultEpsilon);

    // The prepared product state is an eigenvector of the combined Hamiltonian.
    Eigen::Vector4cd psi;
    for (Eigen::Index k = 0; k < 4; ++k) {
      psi(k) = m.sys()[static_cast<std::size_t>(k / 2)] * m.app()[static_cast<std::size_t>(k % 2)];
    }
    const ComplexMatrix& H = m.hamiltonian();
    CHECK(max_hermiticity_error(H) < 1e-15);
    CHECK((H * psi - 1.0 * psi).norm() < 1e-12);  // E/2 + E/2 with E = omega = 1
    CHECK(trace_distance(m.initial_dm(), m.target_dm()) ==
          doctest::Approx(0.6037910511936738).epsilon(1e-12));
  }
  SUBCASE("invalid parameters") {
    CHECK_THROWS_AS(spin_half_scenario(0.3, 0.3, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(spin_half_scenario(0.3, 0.3, 5.0, -1.0), ConfigError);
    CHECK_THROWS_AS(spin_half_scenario(0.3, 0.3, 5.0, 1.0, -1e-4), ConfigError);
  }
}

TEST_CASE("measurement model validation") {
  const StateVector sys({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
  const StateVector app({1.0, 0.0});
  const ComplexMatrix zero = ComplexMatrix::Zero(4, 4);
  CHECK_NOTHROW(MeasurementModel(sys, app, CorrespondenceMap::one_to_one(2), 1.0, 1.0, 1e-4, zero));

  ComplexMatrix skew = zero;
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(MeasurementModel(sys, app, CorrespondenceMap::one_to_one(2), 1.0, 1.0, 1e-4, skew),
                  ConfigError);
  CHECK_THROWS_AS(MeasurementModel(sys, app, CorrespondenceMap::one_to_one(2), 1.0, 1.0, 1e-4,
                                   ComplexMatrix::Zero(3, 3)),
                  ConfigError);
  CHECK_THROWS_AS(MeasurementModel(sys, StateVector({1.0, 0.0, 0.0}),
                                   CorrespondenceMap::one_to_one(2), 1.0, 1.0, 1e-4, zero),
                  ConfigError);
  CHECK_THROWS_AS(MeasurementModel(sys, app, CorrespondenceMap::one_to_one(2), 1.0, 1.0, 0.8, zero),
                  ConfigError);

  const auto m = spin_half_scenario(0.37 * kPi, 0.65 * kPi, 5.0, 1.0);
  const auto m10 = m.with_gamma(10.0);
  CHECK(m10.gamma() == 10.0);
  CHECK(m10.omega() == m.omega());
  CHECK((m10.hamiltonian() - m.hamiltonian()).norm() == 0.0);
}
