#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "thermoform/measures.hpp"

using namespace testing;

namespace {

double op_norm(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

Eigen::MatrixXd random_matrix(Rng& rng, int d) {
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

// A 2x2 family is reducible iff the matrices share a real eigenvector.
bool share_real_eigenvector(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  for (int k = 0; k < 2; ++k) {
    if (std::abs(es.eigenvalues()(k).imag()) > 1e-12) continue;
    Eigen::Vector2d v = es.eigenvectors().col(k).real().normalized();
    Eigen::Vector2d w = b * v;
    if (std::abs(v(0) * w(1) - v(1) * w(0)) < 1e-10 * (1 + w.norm())) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("norm potential on the diagonal example") {
  const auto phi = norm_potential(diagonal_example());
  CHECK(phi.structure() == Structure::SubAdditive);
  CHECK(phi(Word{2}).value() == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  for (std::size_t n = 1; n <= 8; ++n)
    CHECK(phi(Word(n, 2)).value() == doctest::Approx(n * std::log(3.0)).epsilon(1e-12));
  CHECK(phi(Word{0, 2}).value() == doctest::Approx(0.0));
  CHECK(phi(Word{}).value() == doctest::Approx(0.0));
}

TEST_CASE("norm of a zero product is minus infinity") {
  Eigen::MatrixXd n(2, 2);
  n << 0, 1, 0, 0;
  const auto phi = norm_potential(MatrixCocycle({n, n}));
  CHECK(phi(Word{0}).value() == doctest::Approx(0.0));
  CHECK(phi(Word{0, 0}).is_neg_infinity());
}

TEST_CASE("singular value potentials") {
  const auto cocycle = diagonal_example();
  const auto phi2 = singular_value_potential(cocycle, 2);
  CHECK(phi2(Word{0, 1}).value() == doctest::Approx(std::log(4.0)));
  CHECK(phi2(Word{2}).is_neg_infinity() == false);
  CHECK(phi2(Word{2, 3}).is_neg_infinity());

  Rng rng(5);
  const MatrixCocycle random({random_matrix(rng, 3), random_matrix(rng, 3)});
  const auto s1 = singular_value_potential(random, 1);
  const auto s3 = singular_value_potential(random, 3);
  const auto nrm = norm_potential(random);
  for (const auto& w : ShiftSpace::full(2).enumerate_words(4)) {
    CHECK(s1(w).value() == doctest::Approx(nrm(w).value()).epsilon(1e-12));
    CHECK(s3(w).value() == doctest::Approx(std::log(std::abs(random.product(w).determinant()))).epsilon(1e-10));
  }
  CHECK_THROWS_AS(singular_value_potential(random, 0), InvalidArgument);
  CHECK_THROWS_AS(singular_value_potential(random, 4), InvalidArgument);
}

TEST_CASE("submultiplicativity and the determinant identity") {
  Rng rng(17);
  const MatrixCocycle c({random_matrix(rng, 3), random_matrix(rng, 3), random_matrix(rng, 3)});
  const auto nrm = norm_potential(c);
  const auto det = singular_value_potential(c, 3);
  const auto space = ShiftSpace::full(3);
  for (const auto& i : space.enumerate_words(2))
    for (const auto& j : space.enumerate_words(3)) {
      Word ij = i;
      ij.insert(ij.end(), j.begin(), j.end());
      CHECK(nrm(ij).value() <= nrm(i).value() + nrm(j).value() + 1e-12);
      CHECK(det(ij).value() == doctest::Approx(det(i).value() + det(j).value()).epsilon(1e-9));
    }
}

TEST_CASE("irreducibility") {
  const auto diag = diagonal_example();
  const auto v = check_irreducibility(diag);
  CHECK_FALSE(v.irreducible);
  // e1 is fixed by all four matrices.
  REQUIRE(v.witness.cols() == 1);
  CHECK(std::abs(v.witness(0, 0)) == doctest::Approx(1.0));
  CHECK(invariance_defect(diag, v.witness) < 1e-12);

  const auto pair = positive_pair();
  CHECK_FALSE(share_real_eigenvector(pair[0], pair[1]));
  CHECK_FALSE(share_real_eigenvector(pair[1], pair[0]));
  CHECK(check_irreducibility(pair).irreducible);

  CHECK_FALSE(check_irreducibility(MatrixCocycle({Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3)})).irreducible);
}

TEST_CASE("irreducibility is invariant under conjugation") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd s = random_matrix(rng, 2);
    if (std::abs(s.determinant()) < 0.1) continue;
    const Eigen::MatrixXd si = s.inverse();
    const auto pair = positive_pair();
    const MatrixCocycle conj({s * pair[0] * si, s * pair[1] * si});
    CHECK(check_irreducibility(conj).irreducible);

    Eigen::MatrixXd upper_a(2, 2), upper_b(2, 2);
    upper_a << 1, 2, 0, 3;
    upper_b << -1, 0.5, 0, 2;
    const MatrixCocycle tri({s * upper_a * si, s * upper_b * si});
    const auto verdict = check_irreducibility(tri);
    CHECK_FALSE(verdict.irreducible);
    CHECK(invariance_defect(tri, verdict.witness) < 1e-9);
  }
}

TEST_CASE("(H1) checks") {
  const auto space = ShiftSpace::full(4);
  const auto h1 = check_h1(space, norm_potential(diagonal_example()), 6);
  CHECK(h1.holds);
  CHECK(h1.pairs_checked > 0);

  const auto binary = ShiftSpace::full(2);
  const std::vector<double> g{0.3, -1.2};
  const auto additive = birkhoff_potential(binary, AdditiveWindowPotential::from_symbol_values(binary, g));
  const auto ha = check_h1(binary, additive, 8);
  CHECK(ha.holds);
  CHECK(ha.max_violation <= 1e-12);

  const auto bumped = WordPotential::from_function(
      [](std::span<const Symbol> w) { return ExtReal(w.size() >= 2 ? 0.1 : 0.0); }, Structure::Unknown, "bump");
  const auto hb = check_h1(binary, bumped, 6);
  CHECK_FALSE(hb.holds);
  CHECK(hb.max_violation == doctest::Approx(0.1));
  CHECK(hb.worst_prefix.size() == 1);
  CHECK(hb.worst_suffix.size() == 1);
}

TEST_CASE("(H2) search") {
  const auto pair = positive_pair();
  const auto cert = search_h2(ShiftSpace::full(2), norm_potential(pair), 2, 0);
  REQUIRE(cert.has_value());
  CHECK(cert->c_n > 0.0);
  CHECK(cert->t_n == 0);

  // Brute force over symbol pairs and bridges of length <= 2.
  const auto diag = diagonal_example();
  const auto space = ShiftSpace::full(4);
  double c1 = 1e300;
  for (Symbol i = 0; i < 4; ++i)
    for (Symbol j = 0; j < 4; ++j) {
      double best = 0.0;
      for (std::size_t t = 0; t <= 2; ++t)
        for (const auto& k : (t == 0 ? std::vector<Word>{Word{}} : space.enumerate_words(t))) {
          Word w{i};
          w.insert(w.end(), k.begin(), k.end());
          w.push_back(j);
          best = std::max(best, op_norm(diag.product(w)) / (op_norm(diag[i]) * op_norm(diag[j])));
        }
      c1 = std::min(c1, best);
    }
  CHECK(c1 == doctest::Approx(1.0 / 12.0));
  const auto dcert = search_h2(space, norm_potential(diag), 1, 2);
  REQUIRE(dcert.has_value());
  CHECK(dcert->c_n == doctest::Approx(c1).epsilon(1e-12));
  REQUIRE_FALSE(dcert->witnesses.empty());
  CHECK(dcert->witnesses.front().log_ratio == doctest::Approx(std::log(c1)));

  const auto binary = ShiftSpace::full(2);
  // Every bridge symbol has a negative value, so the empty bridge is optimal.
  const std::vector<double> g{-0.3, -1.2};
  const auto additive = birkhoff_potential(binary, AdditiveWindowPotential::from_symbol_values(binary, g));
  const auto acert = search_h2(binary, additive, 3, 1);
  REQUIRE(acert.has_value());
  CHECK(acert->c_n == doctest::Approx(1.0));
  CHECK(acert->t_n == 0);
}

TEST_CASE("(H2) fails when a pair has no positive bridge") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 1, 0, 0, 0;
  b << 0, 0, 0, 1;
  CHECK_FALSE(search_h2(ShiftSpace::full(2), norm_potential(MatrixCocycle({a, b})), 1, 2).has_value());
}
