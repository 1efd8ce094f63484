#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "thermoform/markov.hpp"
#include "thermoform/measures.hpp"
#include "thermoform/pressure.hpp"

using namespace testing;

namespace {

WordPotential symbol_potential(const ShiftSpace& space, std::vector<double> values) {
  return birkhoff_potential(space, AdditiveWindowPotential::from_symbol_values(space, values));
}

MarkovMeasure random_chain(Rng& rng, std::size_t m) {
  Eigen::MatrixXd p(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) p(i, j) = 0.05 + rng.uniform();
    p.row(i) /= p.row(i).sum();
  }
  return MarkovMeasure::from_transition(p);
}

// Expectation of log phi under the uniform Bernoulli measure on the diagonal
// example: only the 2^n words over {0,1} and the two constant words 2..2 and
// 3..3 have phi != 1.
double diagonal_uniform_expectation(std::size_t n) {
  const double nd = double(n);
  return std::pow(4.0, -nd) * (std::pow(2.0, nd) * nd * std::log(2.0) + nd * std::log(3.0) + nd * std::log(4.0)) /
         nd;
}

}  // namespace

TEST_CASE("Rng is reproducible") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }
  Rng u(1);
  double lo = 1, hi = 0;
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("entropy") {
  const std::vector<double> uniform(4, 0.25);
  CHECK(entropy(MarkovMeasure::bernoulli(uniform)) == doctest::Approx(std::log(4.0)));
  CHECK(entropy(MarkovMeasure::dirac(3, 1)) == 0.0);
  const std::vector<double> b{0.3, 0.7};
  CHECK(entropy(MarkovMeasure::bernoulli(b)) == doctest::Approx(0.610864).epsilon(1e-6));
  CHECK(entropy(MarkovMeasure::bernoulli(b)) == doctest::Approx(binary_entropy(0.3)).epsilon(1e-14));
}

TEST_CASE("phi_star") {
  const auto binary = ShiftSpace::full(2);
  const auto g = symbol_potential(binary, {0.4, -1.1});
  const std::vector<double> w{0.35, 0.65};
  const auto mu = MarkovMeasure::bernoulli(w);
  const auto ex = phi_star(binary, mu, g, {PhiStarMethod::ExactAdditive});
  CHECK(ex.value.value() == doctest::Approx(0.35 * 0.4 - 0.65 * 1.1).epsilon(1e-14));
  CHECK(ex.std_error == 0.0);
  const auto cyl = phi_star(binary, mu, g, {PhiStarMethod::CylinderExpectation, 6});
  CHECK(cyl.value.value() == doctest::Approx(ex.value.value()).epsilon(1e-12));
  CHECK_THROWS_AS(phi_star(binary, mu, norm_potential(positive_pair()), {PhiStarMethod::ExactAdditive}),
                  InvalidArgument);

  const auto space = ShiftSpace::full(4);
  const auto diag = norm_potential(diagonal_example());
  for (std::size_t n : {1u, 3u, 6u})
    CHECK(phi_star(space, MarkovMeasure::dirac(4, 3), diag, {PhiStarMethod::CylinderExpectation, n}).value.value() ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));
  const std::vector<double> uniform(4, 0.25);
  for (std::size_t n : {2u, 4u, 8u})
    CHECK(phi_star(space, MarkovMeasure::bernoulli(uniform), diag, {PhiStarMethod::CylinderExpectation, n})
              .value.value() == doctest::Approx(diagonal_uniform_expectation(n)).epsilon(1e-12));

  Eigen::MatrixXd nil(2, 2);
  nil << 0, 1, 0, 0;
  const auto dead = norm_potential(MatrixCocycle({nil, nil}));
  const std::vector<double> half{0.5, 0.5};
  CHECK(phi_star(binary, MarkovMeasure::bernoulli(half), dead, {PhiStarMethod::CylinderExpectation, 3})
            .value.is_neg_infinity());
}

TEST_CASE("Kingman dyadic monotonicity") {
  Rng rng(5);
  const auto space = ShiftSpace::full(2);
  const auto phi = norm_potential(positive_pair());
  for (int t = 0; t < 10; ++t) {
    const auto mu = random_chain(rng, 2);
    double prev = 1e300;
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u}) {
      const double v = cylinder_expectation(space, mu, phi, n).value();
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("Monte Carlo estimate agrees with the exact additive value") {
  const auto space = ShiftSpace::full(3);
  const auto g = symbol_potential(space, {1.0, -0.5, 2.0});
  Rng rng(77);
  for (int t = 0; t < 5; ++t) {
    const auto mu = random_chain(rng, 3);
    const auto exact = phi_star(space, mu, g, {PhiStarMethod::ExactAdditive});
    const auto mc = phi_star(space, mu, g, {PhiStarMethod::MonteCarloKingman, 32, 2000, 100 + std::uint64_t(t)});
    CHECK(mc.std_error > 0.0);
    CHECK(std::abs(mc.value.value() - exact.value.value()) <= 4 * mc.std_error);
    const auto again = phi_star(space, mu, g, {PhiStarMethod::MonteCarloKingman, 32, 2000, 100 + std::uint64_t(t)});
    CHECK(again.value.value() == mc.value.value());
  }
}

TEST_CASE("affinity of the cylinder expectation") {
  const auto space4 = ShiftSpace::full(4);
  const auto diag = norm_potential(diagonal_example());
  const auto d3 = MarkovMeasure::dirac(4, 2), d4 = MarkovMeasure::dirac(4, 3);
  CHECK(affinity_check(space4, d3, d4, 0.5, diag, 8) <= 1e-12);
  CHECK(affinity_check(space4, d3, d4, 1.0, diag, 8) <= 1e-12);

  const auto space = ShiftSpace::full(2);
  const auto g = symbol_potential(space, {0.3, 1.7});
  const auto pair = norm_potential(positive_pair());
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const double p1 = rng.uniform(), p2 = rng.uniform();
    const std::vector<double> w1{p1, 1 - p1}, w2{p2, 1 - p2};
    const auto m1 = MarkovMeasure::bernoulli(w1), m2 = MarkovMeasure::bernoulli(w2);
    CHECK(affinity_check(space, m1, m2, 0.5, g, 6) <= 1e-12);
    CHECK(affinity_check(space, m1, m2, rng.uniform(), pair, 6) <= 1e-12);
  }
  CHECK_THROWS_AS(affinity_check(space, MarkovMeasure::dirac(2, 0), MarkovMeasure::dirac(2, 1), 0.0, g, 4),
                  InvalidArgument);
}

TEST_CASE("cylinder entropy is concave under mixing") {
  const auto space = ShiftSpace::full(2);
  Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    const auto m1 = random_chain(rng, 2), m2 = random_chain(rng, 2);
    const double p = rng.uniform();
    const MeasureMixture mix{{p, 1 - p}, {m1, m2}};
    const double lhs = cylinder_entropy(space, mix, 6);
    const double rhs = p * cylinder_entropy(space, MeasureMixture::single(m1), 6) +
                       (1 - p) * cylinder_entropy(space, MeasureMixture::single(m2), 6);
    CHECK(lhs >= rhs - 1e-12);
  }
}

TEST_CASE("variational inequality for random Markov measures") {
  const auto space = ShiftSpace::full(4);
  const auto diag = norm_potential(diagonal_example());
  Rng rng(20);
  for (int t = 0; t < 20; ++t) {
    const auto mu = random_chain(rng, 4);
    for (double q : {0.5, 1.0, 2.0}) {
      const double lhs = entropy(mu) + q * cylinder_expectation(space, mu, diag, 5).value();
      CHECK(lhs <= finite_pressure(space, diag, q, 5) + 1e-9);
    }
  }
}

TEST_CASE("equilibrium search") {
  const auto binary = ShiftSpace::full(2);
  const std::vector<double> g{0.2, 1.3};
  const auto phi = symbol_potential(binary, g);
  const double z = std::exp(g[0]) + std::exp(g[1]);
  const auto r = equilibrium_search(binary, phi, 1.0, {4, 200, 4, 1});
  CHECK(r.objective == doctest::Approx(std::log(z)).epsilon(1e-9));
  CHECK(std::abs(r.objective - std::log(z)) <= 1e-6);
  CHECK(r.measure.stationary()(1) == doctest::Approx(std::exp(g[1]) / z).epsilon(1e-4));
  CHECK(r.restart_objectives.size() == 4);

  const auto space3 = ShiftSpace::full(3);
  const auto zero = birkhoff_potential(space3, AdditiveWindowPotential::constant(space3, 0.0));
  const auto u = equilibrium_search(space3, zero, 2.0, {2, 100, 3, 1});
  CHECK(u.objective == doctest::Approx(std::log(3.0)).epsilon(1e-8));
  CHECK(u.entropy == doctest::Approx(std::log(3.0)).epsilon(1e-8));

  const auto space4 = ShiftSpace::full(4);
  const auto diag = norm_potential(diagonal_example());
  const double dirac_value = entropy(MarkovMeasure::dirac(4, 3)) +
                             2.0 * cylinder_expectation(space4, MarkovMeasure::dirac(4, 3), diag, 3).value();
  CHECK(dirac_value == doctest::Approx(2 * std::log(4.0)));
  const auto d = equilibrium_search(space4, diag, 2.0, {6, 100, 3, 1});
  CHECK(std::abs(d.objective - 2 * std::log(4.0)) <= 0.1);
  CHECK(d.objective <= finite_pressure(space4, diag, 2.0, 3) + 1e-9);

  const auto again = equilibrium_search(space4, diag, 2.0, {6, 100, 3, 1});
  CHECK(again.objective == d.objective);
  CHECK(again.restart == d.restart);
}

TEST_CASE("trajectory sampling") {
  CHECK(sample_trajectory(MarkovMeasure::dirac(3, 2), 20, 5) == Word(20, 2));
  const std::vector<double> half{0.5, 0.5};
  const auto mu = MarkovMeasure::bernoulli(half);
  CHECK(sample_trajectory(mu, 100, 9) == sample_trajectory(mu, 100, 9));
  CHECK(sample_trajectory(mu, 100, 9) != sample_trajectory(mu, 100, 10));
  const auto w = sample_trajectory(mu, 100000, 2024);
  double ones = 0;
  for (Symbol s : w) ones += s;
  CHECK(std::abs(ones / 100000 - 0.5) <= 0.01);
  CHECK_THROWS_AS(sample_trajectory(mu, 0, 1), InvalidArgument);
}
