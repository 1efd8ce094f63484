#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "thermoform/markov.hpp"
#include "thermoform/measures.hpp"
#include "thermoform/parallel.hpp"
#include "thermoform/pressure.hpp"

using namespace testing;

namespace {

WordPotential symbol_potential(const ShiftSpace& space, std::vector<double> values) {
  return birkhoff_potential(space, AdditiveWindowPotential::from_symbol_values(space, values));
}

}  // namespace

TEST_CASE("finite pressure of the diagonal example matches the closed form") {
  const auto space = ShiftSpace::full(4);
  const auto phi = norm_potential(diagonal_example());
  for (std::size_t n : {1u, 3u, 5u, 7u})
    for (double q : {0.25, 1.0, 2.0, 3.5})
      CHECK(finite_pressure(space, phi, q, n) ==
            doctest::Approx(std::log(diagonal_sum(n, q)) / double(n)).epsilon(1e-12));
  CHECK(finite_pressure(space, phi, 0.0, 6) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("constant and binary additive potentials") {
  const auto space = ShiftSpace::full(3);
  const auto c = birkhoff_potential(space, AdditiveWindowPotential::constant(space, 0.8));
  for (double q : {-2.0, 0.0, 1.5})
    CHECK(finite_pressure(space, c, q, 6) == doctest::Approx(std::log(3.0) + 0.8 * q));

  const auto binary = ShiftSpace::full(2);
  const auto phi = symbol_potential(binary, {0.0, std::log(2.0)});
  const std::vector<double> qs = linspace(-3, 3, 13);
  const auto curve = pressure_curve(binary, phi, qs, 10);
  CHECK(curve.domain == QDomain::AllQ);
  for (std::size_t i = 0; i < qs.size(); ++i)
    CHECK(curve.values[i] == doctest::Approx(std::log1p(std::pow(2.0, qs[i]))).epsilon(1e-12));
}

TEST_CASE("Fekete brackets") {
  const auto space = ShiftSpace::full(4);
  const auto phi = norm_potential(diagonal_example());
  const PressureSequence seq(space, phi, 8);
  CHECK(seq.subadditive_at(1.0));
  CHECK(seq.subadditive_at(2.5));
  for (double q : {0.5, 1.0, 2.0}) {
    double best = 1e300;
    for (std::size_t n = 1; n <= 8; ++n) best = std::min(best, std::log(diagonal_sum(n, q)) / double(n));
    const auto up = seq.fekete_upper(q);
    REQUIRE(up.has_value());
    CHECK(*up == doctest::Approx(best).epsilon(1e-12));
    // The limit is q log 4 for q >= 1 and log 4 below.
    CHECK(*up >= std::max(q, 1.0) * std::log(4.0) - 1e-12);
  }
  const auto est = pressure_estimate(seq, 1.0);
  CHECK(est.n == 8);
  CHECK(est.upper.has_value());
  CHECK_FALSE(est.lower.has_value());
  CHECK(est.value >= *est.upper - 1e-12);
}

TEST_CASE("(H2) lower bracket sits below the Fekete upper bracket") {
  const auto space = ShiftSpace::full(2);
  const auto phi = norm_potential(positive_pair());
  const PressureSequence seq(space, phi, 10);
  const auto cert = search_h2(space, phi, 2, 0);
  REQUIRE(cert.has_value());
  for (double q : {0.1, 0.5, 1.0, 2.0, 3.0}) {
    const auto est = pressure_estimate(seq, q, cert);
    REQUIRE(est.upper.has_value());
    REQUIRE(est.lower.has_value());
    CHECK(*est.lower <= *est.upper);
    CHECK(*est.lower <= est.value + 1e-12);
    CHECK(est.value <= seq.finite_pressure(q, 1) + 1e-12);
  }
  CHECK_FALSE(pressure_estimate(seq, -1.0, cert).lower.has_value());
}

TEST_CASE("pressure curves are convex and monotone for non-negative potentials") {
  const auto space = ShiftSpace::full(4);
  const auto phi = norm_potential(diagonal_example());
  const auto qs = linspace(0.1, 3.0, 30);
  const auto curve = pressure_curve(space, phi, qs, 8);
  CHECK(curve.convexity_defect <= 1e-9);
  for (std::size_t i = 1; i < qs.size(); ++i) CHECK(curve.values[i] >= curve.values[i - 1]);

  Rng rng(3);
  const auto level = level_statistics(space, phi, 7);
  for (int t = 0; t < 50; ++t) {
    const double a = 4 * rng.uniform(), b = 4 * rng.uniform();
    CHECK(level.pressure(0.5 * (a + b)) <= 0.5 * (level.pressure(a) + level.pressure(b)) + 1e-12);
  }
}

TEST_CASE("pressure grid validation") {
  const auto space = ShiftSpace::full(4);
  const auto phi = norm_potential(diagonal_example());
  CHECK_THROWS_AS(pressure_curve(space, phi, std::vector<double>{}, 4), InvalidArgument);
  CHECK_THROWS_AS(pressure_curve(space, phi, std::vector<double>{-1.0, 0.5, 1.0}, 4), InvalidArgument);
  CHECK_THROWS_AS(pressure_curve(space, phi, std::vector<double>{1.0, 0.5, 2.0}, 4), InvalidArgument);
  CHECK(default_domain(phi) == QDomain::PositiveQ);
}

TEST_CASE("results do not depend on the thread count") {
  const auto space = ShiftSpace::full(4);
  const auto phi = norm_potential(diagonal_example());
  set_thread_count(1);
  const auto serial = level_statistics(space, phi, 1, 8);
  set_thread_count(4);
  const auto parallel = level_statistics(space, phi, 1, 8);
  set_thread_count(0);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].values == parallel[i].values);
    CHECK(serial[i].counts == parallel[i].counts);
    CHECK(serial[i].log_sum(1.7) == parallel[i].log_sum(1.7));
  }
}

TEST_CASE("joint pressure") {
  const auto space = ShiftSpace::full(2);
  const std::vector<WordPotential> phis{symbol_potential(space, {0.0, 1.0}), symbol_potential(space, {1.0, 0.0})};
  for (double q1 : {-1.0, 0.0, 2.0})
    for (double q2 : {-0.5, 1.0}) {
      const std::vector<double> q{q1, q2};
      CHECK(pressure_kd(space, phis, q, 7) == doctest::Approx(std::log(std::exp(q1) + std::exp(q2))).epsilon(1e-12));
    }

  Eigen::MatrixXd nil(2, 2);
  nil << 0, 1, 0, 0;
  const std::vector<WordPotential> dead{norm_potential(MatrixCocycle({nil, nil})), phis[0]};
  const auto stats = joint_level_statistics(space, dead, 3);
  CHECK_THROWS_AS(stats.log_sum(std::vector<double>{-1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(stats.log_sum(std::vector<double>{1.0, 1.0}), DomainError);
  CHECK(stats.log_sum(std::vector<double>{0.0, 1.0}) == doctest::Approx(std::log(std::pow(1 + std::exp(1.0), 3))));
}

TEST_CASE("variational gap") {
  const auto binary = ShiftSpace::full(2);
  const std::vector<double> g{0.3, -0.7};
  const auto phi = symbol_potential(binary, g);
  const double q = 1.3;
  const double z = std::exp(q * g[0]) + std::exp(q * g[1]);
  const std::vector<double> gibbs{std::exp(q * g[0]) / z, std::exp(q * g[1]) / z};
  CHECK(std::abs(variational_gap(binary, phi, q, MarkovMeasure::bernoulli(gibbs), 6)) <= 1e-12);

  const auto space = ShiftSpace::full(4);
  const auto zero = birkhoff_potential(space, AdditiveWindowPotential::constant(space, 0.0));
  const std::vector<double> uniform(4, 0.25);
  CHECK(std::abs(variational_gap(space, zero, 1.0, MarkovMeasure::bernoulli(uniform), 5)) <= 1e-12);

  const auto diag = norm_potential(diagonal_example());
  const double eps = 1e-3;
  const std::vector<double> near_dirac{eps, eps, eps, 1 - 3 * eps};
  const double gap = variational_gap(space, diag, 2.0, MarkovMeasure::bernoulli(near_dirac), 6);
  CHECK(gap >= 0.0);
  CHECK(gap < 0.1);

  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd p(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) p(i, j) = 0.05 + rng.uniform();
      p.row(i) /= p.row(i).sum();
    }
    CHECK(variational_gap(space, diag, 0.5 + 2 * rng.uniform(), MarkovMeasure::from_transition(p), 5) >= -1e-12);
  }
}
