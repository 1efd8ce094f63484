#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermoform/cocycle.hpp"
#include "thermoform/convex.hpp"
#include "thermoform/potentials.hpp"
#include "thermoform/symbolic.hpp"

namespace thermoform {

class MarkovMeasure;

/// Distribution of log phi over the admissible words of one length: the
/// distinct finite values in ascending order with multiplicities. Every
/// pressure quantity at that length is a function of this table.
struct LevelStatistics {
  std::size_t n = 0;
  std::vector<double> values;
  std::vector<std::uint64_t> counts;
  std::uint64_t zero_words = 0;   // words with phi(I) = 0, excluded from sums
  std::uint64_t total_words = 0;

  bool empty() const { return values.empty(); }
  double max_value() const;
  double min_value() const;
  /// log sum over words with phi > 0 of phi(I)^q; DomainError when empty.
  double log_sum(double q) const;
  /// log_sum(q) / n.
  double pressure(double q) const { return log_sum(q) / static_cast<double>(n); }
};

/// Statistics for the lengths first..last, gathered in one depth-first pass.
/// Work is partitioned by fixed word prefixes and merged in prefix order, so
/// results do not depend on thread_count().
std::vector<LevelStatistics> level_statistics(const ShiftSpace& space, const WordPotential& phi,
                                              std::size_t first, std::size_t last);
LevelStatistics level_statistics(const ShiftSpace& space, const WordPotential& phi, std::size_t n);

/// (1/n) log sum_{|I|=n, phi(I)>0} exp(q Phi(I)).
double finite_pressure(const ShiftSpace& space, const WordPotential& phi, double q, std::size_t n);

/// Levels 1..n_max of one potential, with cached (H1) checks, for Fekete
/// brackets.
class PressureSequence {
 public:
  PressureSequence(const ShiftSpace& space, const WordPotential& phi, std::size_t n_max);

  std::size_t n_max() const { return levels_.size(); }
  const LevelStatistics& level(std::size_t n) const { return levels_.at(n - 1); }
  double finite_pressure(double q, std::size_t n) const { return level(n).pressure(q); }

  /// Whether q * Phi passed the exhaustive (H1) check, making log_sum
  /// subadditive in n. Checked up to h1_depth().
  bool subadditive_at(double q) const;
  std::size_t h1_depth() const { return h1_depth_; }
  /// min over n <= n_max of finite_pressure(q, n), when subadditive_at(q).
  std::optional<double> fekete_upper(double q) const;
  /// (1/n) max_{|I|=n} Phi(I) for n = 1..n_max.
  std::vector<double> max_averages() const;
  std::vector<double> min_averages() const;

  const ShiftSpace& space() const { return space_; }
  const WordPotential& potential() const { return phi_; }

 private:
  ShiftSpace space_;
  WordPotential phi_;
  std::vector<LevelStatistics> levels_;
  std::size_t h1_depth_ = 0;
  bool h1_positive_ = false;  // H1 for Phi (covers q >= 0)
  bool h1_negative_ = false;  // H1 for -Phi (covers q < 0)
};

struct PressureEstimate {
  double value = 0.0;              // finite_pressure at n_max
  std::optional<double> upper;     // Fekete bracket
  std::optional<double> lower;     // from an (H2) certificate
  std::size_t n = 0;
  std::string label;
};

/// Finite-n pressure with brackets. The upper bracket needs the (H1) check of
/// q*Phi to pass; the lower bracket needs q > 0 and a certificate at some
/// n_c <= n_max: (a_{n_c}(q) + q log c - log(t+1)) / (n_c + t).
PressureEstimate pressure_estimate(const PressureSequence& seq, double q,
                                   const std::optional<H2Certificate>& certificate = std::nullopt);
PressureEstimate pressure_estimate(const ShiftSpace& space, const WordPotential& phi, double q, std::size_t n_max,
                                   const std::optional<H2Certificate>& certificate = std::nullopt);

struct PressureCurve {
  std::vector<double> q_grid;
  std::vector<double> values;
  std::vector<std::optional<double>> upper;
  std::vector<std::optional<double>> lower;
  std::size_t n = 0;
  QDomain domain = QDomain::PositiveQ;
  double convexity_defect = 0.0;
  std::string label;

  GridFunction as_grid_function() const { return GridFunction(q_grid, values); }
};

/// Default domain: AllQ for additive potentials, PositiveQ otherwise.
QDomain default_domain(const WordPotential& phi);

/// Pressure at every grid point from one enumeration. Brackets are
/// filled when `with_brackets` is set (enumerates lengths 1..n).
PressureCurve pressure_curve(const ShiftSpace& space, const WordPotential& phi, std::span<const double> q_grid,
                             std::size_t n, std::optional<QDomain> domain = std::nullopt,
                             bool with_brackets = true,
                             const std::optional<H2Certificate>& certificate = std::nullopt);
PressureCurve pressure_curve(const PressureSequence& seq, std::span<const double> q_grid,
                             std::optional<QDomain> domain = std::nullopt,
                             const std::optional<H2Certificate>& certificate = std::nullopt);

/// Joint distribution of (Phi_1(I), ..., Phi_k(I)) over length-n words.
struct JointLevelStatistics {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::vector<ExtReal>> tuples;  // distinct, lexicographic
  std::vector<std::uint64_t> counts;

  /// log sum exp(q . Phi(I)) over words where the combination is finite;
  /// DomainError for a negative coefficient on a -inf entry or an empty sum.
  double log_sum(std::span<const double> q) const;
  double pressure(std::span<const double> q) const { return log_sum(q) / static_cast<double>(n); }
};

JointLevelStatistics joint_level_statistics(const ShiftSpace& space, std::span<const WordPotential> phis,
                                            std::size_t n);

/// finite_pressure of sum_i q_i Phi_i.
double pressure_kd(const ShiftSpace& space, std::span<const WordPotential> phis, std::span<const double> q,
                   std::size_t n);

/// finite_pressure(q, n) - (h_mu + q Phi_*(mu)) with Phi_* the length-n
/// cylinder expectation. Non-negative for every mu (Gibbs inequality).
double variational_gap(const ShiftSpace& space, const WordPotential& phi, double q, const MarkovMeasure& mu,
                       std::size_t n);

}  // namespace thermoform
