#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermoform/convex.hpp"
#include "thermoform/extended_real.hpp"
#include "thermoform/pressure.hpp"

namespace thermoform {

/// Label attached to every spectrum output: the Legendre expression bounds
/// the level-set entropy from above and is only known to be equal to it under
/// extra hypotheses.
inline constexpr const char* kSpectrumProvenance =
    "Legendre spectrum (upper bound; equality under upper semi-continuous entropy, additivity, or (H1)+(H2))";

/// Estimates of the endpoints [a, b] of the Lyapunov spectrum domain.
struct DomainEstimate {
  double lower = 0.0;  // a
  double upper = 0.0;  // b
  std::size_t n = 0;
  std::vector<double> max_averages;  // beta_n = (1/n) max Phi
  std::vector<double> min_averages;  // (1/n) min over words with phi > 0
  std::optional<double> upper_bracket;  // min_n beta_n, valid when (H1) holds for Phi
  std::optional<double> lower_bracket;  // max_n of min averages, valid when (H1) holds for -Phi
  double slope_upper = 0.0;              // asymptotic slope of P_n at large q
  std::optional<double> slope_lower;     // asymptotic slope at very negative q (AllQ only)
  std::string lower_source;              // "slope" or "min_average"
};

/// b from the direct max averages cross-checked against the asymptotic
/// slope of P_n on [q_far/2, q_far]; a from the slope at -q_far for AllQ
/// domains, otherwise from the per-n min averages.
DomainEstimate lyapunov_domain(const PressureSequence& seq, QDomain domain, double q_far = 64.0);
DomainEstimate lyapunov_domain(const ShiftSpace& space, const WordPotential& phi, std::size_t n,
                               std::optional<QDomain> domain = std::nullopt);

/// Default q grids: 160 points on (0, 8] for PositiveQ, 321 points on [-8, 8]
/// for AllQ.
std::vector<double> default_q_grid(QDomain domain);

struct SpectrumPoint {
  ExtReal value;
  LegendreResult legendre;
};

/// inf over the q grid of P_n(q) - alpha q, with golden-section refinement
/// against the exact level statistics. MinusInfinity when the edge-slope test
/// certifies alpha outside the domain.
SpectrumPoint spectrum_point(const LevelStatistics& level, double alpha, QDomain domain,
                             std::span<const double> q_grid = {});
ExtReal spectrum_value(const ShiftSpace& space, const WordPotential& phi, double alpha, std::size_t n,
                       std::optional<QDomain> domain = std::nullopt, std::span<const double> q_grid = {});

struct SpectrumCurve {
  std::vector<double> alpha_grid;
  std::vector<ExtReal> values;
  std::vector<bool> boundary_active;
  DomainEstimate domain;
  QDomain q_domain = QDomain::PositiveQ;
  std::vector<double> q_grid;
  std::size_t n = 0;
  std::string provenance = kSpectrumProvenance;
};

SpectrumCurve spectrum_curve(const PressureSequence& seq, std::span<const double> alpha_grid,
                             std::optional<QDomain> domain = std::nullopt, std::span<const double> q_grid = {});
SpectrumCurve spectrum_curve(const ShiftSpace& space, const WordPotential& phi, std::span<const double> alpha_grid,
                             std::size_t n, std::optional<QDomain> domain = std::nullopt,
                             std::span<const double> q_grid = {});

/// Result of minimizing a convex function of q in R^k over a box grid.
struct KdMinimum {
  bool minus_infinity = false;
  double value = 0.0;
  std::vector<double> argmin;
  std::vector<double> gradient;  // exact gradient at argmin
  bool boundary_active = false;
  double margin = 0.0;
};

/// Default per-axis grid on [-8, 8] (AllQ) or (0, 8] (PositiveQ): 161, 81
/// and 33 points for k = 1, 2, 3.
std::vector<std::vector<double>> default_q_axes(std::size_t k, QDomain domain);

/// inf over q of P_n(q) - a . q for the joint statistics of (Phi_1..Phi_k),
/// k <= 3. Grid search, then coordinate descent from the grid argmin. A
/// minimizer on a box face is taken as unbounded when the exact gradient
/// still descends outward by more than the margin and the value there is
/// already negative.
KdMinimum joint_spectrum_kd(const JointLevelStatistics& stats, std::span<const double> a,
                            const std::vector<std::vector<double>>& q_axes, QDomain domain = QDomain::AllQ);
ExtReal joint_spectrum_kd(const ShiftSpace& space, std::span<const WordPotential> phis, std::span<const double> a,
                          std::size_t n, const std::vector<std::vector<double>>& q_axes = {},
                          QDomain domain = QDomain::AllQ);

enum class Membership { Inside, Outside, BoundaryUncertain };
const char* to_string(Membership m);

struct MembershipOptions {
  double log_c = 0.0;  // Psi_i(I) >= log C + n log(1 + delta) on length-n words
  double delta = 1.0;
  double band = 1e-6;  // values within the band of 0 are not decided
  std::vector<std::vector<double>> q_axes;  // empty: default_q_axes(k, AllQ)
};

struct MembershipResult {
  Membership verdict = Membership::BoundaryUncertain;
  KdMinimum minimum;  // of P_a(q) = pressure of sum q_i (Phi_i - a_i Psi_i)
  double psi_min = 0.0;      // min over words and i of Psi_i(I)
  double psi_required = 0.0; // log C + n log(1 + delta)
};

/// Classifies a by the infimum of P_a over R^k: Outside when it is below
/// -band or certified unbounded with the edge value below -band, Inside when
/// it exceeds band at an interior minimizer, BoundaryUncertain otherwise.
/// Psi entries must be Additive-flagged; the growth bound is checked on
/// every length-n word and a violation raises DomainError.
MembershipResult membership(const ShiftSpace& space, std::span<const WordPotential> phis,
                            std::span<const WordPotential> psis, std::span<const double> a, std::size_t n,
                            const MembershipOptions& options = {});

/// H(a) = inf_q P_a(q) when Inside, MinusInfinity when Outside, and the
/// infimum clamped at 0 when the verdict is BoundaryUncertain.
ExtReal ratio_spectrum(const MembershipResult& m);
ExtReal ratio_spectrum(const ShiftSpace& space, std::span<const WordPotential> phis,
                       std::span<const WordPotential> psis, std::span<const double> a, std::size_t n,
                       const MembershipOptions& options = {});

}  // namespace thermoform
