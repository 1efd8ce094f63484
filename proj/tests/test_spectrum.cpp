#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "thermoform/measures.hpp"
#include "thermoform/spectrum.hpp"

using namespace testing;

namespace {

const double kLog2 = std::log(2.0);
const double kLog4 = std::log(4.0);

WordPotential symbol_potential(const ShiftSpace& space, std::vector<double> values) {
  return birkhoff_potential(space, AdditiveWindowPotential::from_symbol_values(space, values));
}

WordPotential binary_phi() {
  const auto space = ShiftSpace::full(2);
  return symbol_potential(space, {0.0, kLog2});
}

// Brute-force inf over a dense q grid of the closed-form diagonal pressure.
double diagonal_legendre(std::size_t n, double alpha) {
  double best = 1e300;
  for (double q = 0.001; q <= 3.0; q += 0.0005)
    best = std::min(best, std::log(diagonal_sum(n, q)) / double(n) - alpha * q);
  return best;
}

double entropy3(double a, double b) {
  double h = 0;
  for (double p : {a, b, 1 - a - b})
    if (p > 0) h -= p * std::log(p);
  return h;
}

}  // namespace

TEST_CASE("spectrum provenance label") {
  const std::string label = kSpectrumProvenance;
  CHECK(label.find("upper bound") != std::string::npos);
}

TEST_CASE("Lyapunov domains") {
  const auto space4 = ShiftSpace::full(4);
  const auto d = lyapunov_domain(space4, norm_potential(diagonal_example()), 8);
  for (double b : d.max_averages) CHECK(b == doctest::Approx(kLog4));
  REQUIRE(d.upper_bracket.has_value());
  CHECK(*d.upper_bracket == doctest::Approx(kLog4));
  CHECK(d.upper == doctest::Approx(kLog4).epsilon(1e-3));

  const auto space = ShiftSpace::full(2);
  for (std::size_t n : {2u, 5u, 9u}) {
    const auto db = lyapunov_domain(space, binary_phi(), n);
    CHECK(db.lower == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(db.upper == doctest::Approx(kLog2).epsilon(1e-9));
    for (double a : db.min_averages) CHECK(a == doctest::Approx(0.0));
  }

  const auto c = birkhoff_potential(space, AdditiveWindowPotential::constant(space, 0.3));
  const auto dc = lyapunov_domain(space, c, 6);
  CHECK(dc.lower == doctest::Approx(0.3));
  CHECK(dc.upper == doctest::Approx(0.3));
  CHECK_THROWS_AS(lyapunov_domain(space, c, 1), InvalidArgument);
}

TEST_CASE("spectrum of the binary additive potential is the binary entropy") {
  const auto space = ShiftSpace::full(2);
  for (int i = 1; i <= 9; ++i) {
    const double p = 0.1 * i;
    const auto v = spectrum_value(space, binary_phi(), p * kLog2, 8);
    REQUIRE(v.is_finite());
    CHECK(std::abs(v.value() - binary_entropy(p)) <= 1e-3);
  }
  CHECK(spectrum_value(space, binary_phi(), kLog2 + 0.1, 8).is_neg_infinity());
  CHECK(spectrum_value(space, binary_phi(), -0.1, 8).is_neg_infinity());
}

TEST_CASE("spectrum curves") {
  const auto space = ShiftSpace::full(2);
  const auto alphas = linspace(0, kLog2, 41);
  const auto curve = spectrum_curve(space, binary_phi(), alphas, 8);
  CHECK(curve.q_domain == QDomain::AllQ);
  CHECK(curve.provenance == kSpectrumProvenance);
  std::size_t best = 0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    REQUIRE(curve.values[i].is_finite());
    if (curve.values[i].value() > curve.values[best].value()) best = i;
    CHECK(curve.values[i].value() >= -1e-9);
    CHECK(curve.values[i].value() <= kLog2 + 1e-9);
  }
  CHECK(alphas[best] == doctest::Approx(kLog2 / 2));
  CHECK(curve.values[best].value() == doctest::Approx(kLog2).epsilon(1e-9));
  for (std::size_t i = 1; i + 1 < alphas.size(); ++i)
    CHECK(curve.values[i].value() >= 0.5 * (curve.values[i - 1].value() + curve.values[i + 1].value()) - 1e-6);

  const auto space4 = ShiftSpace::full(4);
  const std::size_t n = 8;
  const auto diag_alphas = linspace(0.1, kLog4 - 0.1, 7);
  const auto dcurve = spectrum_curve(space4, norm_potential(diagonal_example()), diag_alphas, n);
  CHECK(dcurve.q_domain == QDomain::PositiveQ);
  for (std::size_t i = 0; i < diag_alphas.size(); ++i) {
    REQUIRE(dcurve.values[i].is_finite());
    CHECK(dcurve.values[i].value() == doctest::Approx(diagonal_legendre(n, diag_alphas[i])).epsilon(1e-4));
    // Limit envelope log 4 - alpha, approached from above at rate O(1/n).
    CHECK(dcurve.values[i].value() >= kLog4 - diag_alphas[i] - 1e-9);
    CHECK(dcurve.values[i].value() <= kLog4 - diag_alphas[i] + 0.15);
  }

  const auto c = birkhoff_potential(space, AdditiveWindowPotential::constant(space, 0.3));
  const std::vector<double> ca{0.1, 0.3, 0.5};
  const auto ccurve = spectrum_curve(space, c, ca, 6);
  CHECK(ccurve.values[0].is_neg_infinity());
  REQUIRE(ccurve.values[1].is_finite());
  CHECK(ccurve.values[1].value() == doctest::Approx(kLog2));
  CHECK(ccurve.values[2].is_neg_infinity());
}

TEST_CASE("spectrum covariance under shifts and scaling") {
  const auto space = ShiftSpace::full(2);
  const auto phi = symbol_potential(space, {0.2, 1.1});
  const auto sh = shifted(space, phi, 0.7);
  const auto sc = scaled(2.5, phi);
  const auto qs = linspace(-8, 8, 321);
  const auto qs_scaled = linspace(-8 / 2.5, 8 / 2.5, 321);
  for (double alpha : {0.3, 0.5, 0.65, 0.9}) {
    const auto base = spectrum_value(space, phi, alpha, 6, QDomain::AllQ, qs);
    REQUIRE(base.is_finite());
    CHECK(spectrum_value(space, sh, alpha + 0.7, 6, QDomain::AllQ, qs).value() ==
          doctest::Approx(base.value()).epsilon(1e-9));
    CHECK(spectrum_value(space, sc, 2.5 * alpha, 6, QDomain::AllQ, qs_scaled).value() ==
          doctest::Approx(base.value()).epsilon(1e-6));
  }
}

TEST_CASE("spectrum values do not exceed the topological entropy") {
  const auto space = ShiftSpace::full(3);
  Rng rng(31);
  for (int t = 0; t < 5; ++t) {
    const auto phi = symbol_potential(space, {rng.normal(), rng.normal(), rng.normal()});
    const auto dom = lyapunov_domain(space, phi, 4);
    for (int k = 0; k < 5; ++k) {
      const double alpha = dom.lower + (dom.upper - dom.lower) * rng.uniform();
      const auto v = spectrum_value(space, phi, alpha, 4);
      if (v.is_finite()) CHECK(v.value() <= std::log(3.0) + 1e-9);
    }
  }
}

TEST_CASE("direct counting agrees with the binary spectrum") {
  const auto space = ShiftSpace::full(2);
  const std::size_t n = 16;
  std::vector<double> counts(n + 1, 0.0);
  const auto phi = binary_phi();
  for_each_word(space, n, [&](std::span<const Symbol> w) {
    counts[static_cast<std::size_t>(std::lround(phi(w).value() / kLog2))] += 1;
  });
  for (std::size_t k = 1; k < n; ++k) {
    const double alpha = kLog2 * double(k) / n;
    const auto v = spectrum_value(space, phi, alpha, 4);
    REQUIRE(v.is_finite());
    const double rate = std::log(counts[k]) / double(n);
    CHECK(rate <= v.value() + 1e-6);
    CHECK(rate >= v.value() - std::log(double(n + 1)) / double(n) - 1e-6);
  }
}

TEST_CASE("joint spectra") {
  const auto space = ShiftSpace::full(2);
  const std::vector<WordPotential> one{binary_phi()};
  for (double p : {0.2, 0.5, 0.7}) {
    const std::vector<double> a{p * kLog2};
    const auto kd = joint_spectrum_kd(space, one, a, 6);
    REQUIRE(kd.is_finite());
    CHECK(kd.value() == doctest::Approx(spectrum_value(space, binary_phi(), a[0], 6).value()).epsilon(1e-6));
  }

  const auto space3 = ShiftSpace::full(3);
  const std::vector<WordPotential> two{symbol_potential(space3, {0, 1, 0}), symbol_potential(space3, {0, 0, 1})};
  for (auto [a1, a2] : {std::pair{0.2, 0.3}, std::pair{1.0 / 3, 1.0 / 3}, std::pair{0.5, 0.1}}) {
    const std::vector<double> a{a1, a2};
    const auto v = joint_spectrum_kd(space3, two, a, 5);
    REQUIRE(v.is_finite());
    CHECK(std::abs(v.value() - entropy3(a1, a2)) <= 1e-3);
  }
  CHECK(joint_spectrum_kd(space3, two, std::vector<double>{0.7, 0.6}, 5).is_neg_infinity());
  CHECK(joint_spectrum_kd(space3, two, std::vector<double>{-0.2, 0.3}, 5).is_neg_infinity());
}

TEST_CASE("membership and ratio spectra") {
  const auto space = ShiftSpace::full(2);
  const std::vector<WordPotential> phis{binary_phi()};
  const std::vector<WordPotential> psis{birkhoff_potential(space, AdditiveWindowPotential::constant(space, 1.0))};

  const std::vector<double> mid{kLog2 / 2};
  const auto in = membership(space, phis, psis, mid, 8);
  CHECK(in.verdict == Membership::Inside);
  CHECK(in.psi_min == doctest::Approx(8.0));
  CHECK(in.psi_required == doctest::Approx(8 * kLog2));
  const auto h = ratio_spectrum(in);
  REQUIRE(h.is_finite());
  CHECK(h.value() == doctest::Approx(kLog2).epsilon(1e-6));
  CHECK(h.value() == doctest::Approx(joint_spectrum_kd(space, phis, mid, 8).value()).epsilon(1e-6));

  const std::vector<double> far{2 * kLog2};
  const auto out = membership(space, phis, psis, far, 8);
  CHECK(out.verdict == Membership::Outside);
  CHECK(ratio_spectrum(out).is_neg_infinity());

  for (double edge : {0.0, kLog2}) {
    const auto b = membership(space, phis, psis, std::vector<double>{edge}, 8);
    CHECK(b.verdict == Membership::BoundaryUncertain);
    const auto hb = ratio_spectrum(b);
    REQUIRE(hb.is_finite());
    CHECK(hb.value() >= 0.0);
    // The default box stops at |q| = 8, where the objective is log(1 + 2^-8).
    CHECK(hb.value() <= std::log1p(std::pow(2.0, -8)) + 1e-9);
  }
  CHECK(std::string(to_string(Membership::BoundaryUncertain)) == "boundary_uncertain");
}

TEST_CASE("membership preconditions") {
  const auto space = ShiftSpace::full(2);
  const std::vector<WordPotential> phis{binary_phi()};
  const std::vector<double> a{0.3};
  const std::vector<WordPotential> weak{birkhoff_potential(space, AdditiveWindowPotential::constant(space, 0.5))};
  CHECK_THROWS_AS(membership(space, phis, weak, a, 8), DomainError);
  const std::vector<WordPotential> flagged{WordPotential::from_function(
      [](std::span<const Symbol> w) { return ExtReal(double(w.size())); }, Structure::Unknown, "length")};
  CHECK_THROWS_AS(membership(space, phis, flagged, a, 8), InvalidArgument);
}
