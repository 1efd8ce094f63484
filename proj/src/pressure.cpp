#include "thermoform/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "thermoform/measures.hpp"
#include "thermoform/parallel.hpp"

namespace thermoform {

namespace {

// Fixed partition size; results depend on it only through summation order.
constexpr std::size_t kPartitions = 64;
// Largest level exhaustively checked for (H1) when brackets are requested.
constexpr std::uint64_t kH1WordLimit = std::uint64_t{1} << 16;

struct RunLength {
  std::vector<double> values;
  std::vector<std::uint64_t> counts;
};

RunLength compress(std::vector<double>& raw) {
  std::sort(raw.begin(), raw.end());
  RunLength out;
  for (double v : raw) {
    if (!out.values.empty() && out.values.back() == v) {
      ++out.counts.back();
    } else {
      out.values.push_back(v);
      out.counts.push_back(1);
    }
  }
  return out;
}

RunLength merge(const std::vector<RunLength>& parts) {
  std::vector<std::pair<double, std::uint64_t>> all;
  for (const auto& p : parts)
    for (std::size_t i = 0; i < p.values.size(); ++i) all.push_back({p.values[i], p.counts[i]});
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  RunLength out;
  for (const auto& [v, c] : all) {
    if (!out.values.empty() && out.values.back() == v) {
      out.counts.back() += c;
    } else {
      out.values.push_back(v);
      out.counts.push_back(c);
    }
  }
  return out;
}

/// Records cursor values at every depth in [first, last] along the DFS.
struct LevelCollector {
  PotentialCursor& cursor;
  std::size_t first, last, min_depth;
  std::vector<std::vector<double>>& finite;  // indexed by depth - first
  std::vector<std::uint64_t>& zeros;
  std::size_t depth = 0;

  bool enter(Symbol s) {
    cursor.push(s);
    ++depth;
    if (depth >= first && depth >= min_depth) {
      const ExtReal v = cursor.value();
      if (v.is_finite())
        finite[depth - first].push_back(v.value());
      else
        ++zeros[depth - first];
    }
    return true;
  }
  void leave() {
    cursor.pop();
    --depth;
  }
  void leaf(std::span<const Symbol>) {}
};

}  // namespace

double LevelStatistics::max_value() const {
  if (values.empty()) throw DomainError("no words with phi > 0");
  return values.back();
}

double LevelStatistics::min_value() const {
  if (values.empty()) throw DomainError("no words with phi > 0");
  return values.front();
}

double LevelStatistics::log_sum(double q) const {
  if (values.empty())
    throw DomainError("cylinder sum is empty at length " + std::to_string(n) + ": phi vanishes on every word");
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i)
    top = std::max(top, q * values[i] + std::log(static_cast<double>(counts[i])));
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    acc += static_cast<double>(counts[i]) * std::exp(q * values[i] - top);
  return top + std::log(acc);
}

std::vector<LevelStatistics> level_statistics(const ShiftSpace& space, const WordPotential& phi, std::size_t first,
                                              std::size_t last) {
  if (first < 1 || last < first) throw InvalidArgument("invalid level range");
  space.check_budget(last);
  const std::vector<Word> prefixes = space.partition_prefixes(last, kPartitions);
  const std::size_t p = prefixes.front().size();
  const std::size_t levels = last - first + 1;

  // parts[level][partition]; levels shorter than the prefix get one
  // partition filled by direct evaluation.
  std::vector<std::vector<RunLength>> parts(levels);
  std::vector<std::uint64_t> zeros(levels, 0);
  for (std::size_t d = first; d < std::min(p, last + 1); ++d) {
    std::vector<double> raw;
    for_each_word(space, d, [&](std::span<const Symbol> w) {
      const ExtReal v = phi(w);
      if (v.is_finite())
        raw.push_back(v.value());
      else
        ++zeros[d - first];
    });
    parts[d - first].push_back(compress(raw));
  }

  std::vector<std::vector<RunLength>> per_prefix(prefixes.size());
  std::vector<std::vector<std::uint64_t>> per_prefix_zeros(prefixes.size());
  parallel_for(prefixes.size(), [&](std::size_t i) {
    auto cursor = phi.cursor();
    std::vector<std::vector<double>> finite(levels);
    std::vector<std::uint64_t> z(levels, 0);
    LevelCollector collector{*cursor, first, last, p, finite, z};
    walk_words(space, last, prefixes[i], collector);
    per_prefix[i].reserve(levels);
    for (auto& raw : finite) per_prefix[i].push_back(compress(raw));
    per_prefix_zeros[i] = std::move(z);
  });
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    for (std::size_t l = 0; l < levels; ++l) {
      if (first + l < p) continue;
      parts[l].push_back(std::move(per_prefix[i][l]));
      zeros[l] += per_prefix_zeros[i][l];
    }
  }

  std::vector<LevelStatistics> out(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    RunLength merged = merge(parts[l]);
    out[l].n = first + l;
    out[l].values = std::move(merged.values);
    out[l].counts = std::move(merged.counts);
    out[l].zero_words = zeros[l];
    out[l].total_words = std::accumulate(out[l].counts.begin(), out[l].counts.end(), zeros[l]);
  }
  return out;
}

LevelStatistics level_statistics(const ShiftSpace& space, const WordPotential& phi, std::size_t n) {
  return std::move(level_statistics(space, phi, n, n).front());
}

double finite_pressure(const ShiftSpace& space, const WordPotential& phi, double q, std::size_t n) {
  return level_statistics(space, phi, n).pressure(q);
}

// ---------------------------------------------------------------------------

PressureSequence::PressureSequence(const ShiftSpace& space, const WordPotential& phi, std::size_t n_max)
    : space_(space), phi_(phi), levels_(level_statistics(space, phi, 1, n_max)) {
  std::size_t depth = 0;
  for (std::size_t l = 2; l <= n_max; ++l) {
    if (space.word_count(l) > std::min(kH1WordLimit, space.word_budget())) break;
    depth = l;
  }
  h1_depth_ = depth;
  if (depth >= 2) {
    h1_positive_ = check_h1(space, phi, depth).holds;
    try {
      h1_negative_ = check_h1(space, scaled(-1.0, phi), depth).holds;
    } catch (const DomainError&) {
      h1_negative_ = false;
    }
  }
}

bool PressureSequence::subadditive_at(double q) const { return q >= 0.0 ? h1_positive_ : h1_negative_; }

std::optional<double> PressureSequence::fekete_upper(double q) const {
  if (!subadditive_at(q)) return std::nullopt;
  std::optional<double> best;
  for (const auto& lvl : levels_) {
    if (lvl.empty()) continue;
    const double v = lvl.pressure(q);
    if (!best || v < *best) best = v;
  }
  return best;
}

std::vector<double> PressureSequence::max_averages() const {
  std::vector<double> out;
  for (const auto& lvl : levels_) out.push_back(lvl.max_value() / static_cast<double>(lvl.n));
  return out;
}

std::vector<double> PressureSequence::min_averages() const {
  std::vector<double> out;
  for (const auto& lvl : levels_) out.push_back(lvl.min_value() / static_cast<double>(lvl.n));
  return out;
}

namespace {

std::optional<double> certified_lower(const PressureSequence& seq, double q,
                                      const std::optional<H2Certificate>& cert) {
  if (!cert || !(q > 0.0) || cert->n > seq.n_max() || !(cert->c_n > 0.0)) return std::nullopt;
  const auto& lvl = seq.level(cert->n);
  if (lvl.empty()) return std::nullopt;
  const double t = static_cast<double>(cert->t_n);
  return (lvl.log_sum(q) + q * std::log(cert->c_n) - std::log(t + 1.0)) / (static_cast<double>(cert->n) + t);
}

std::string bracket_label(bool upper, bool lower) {
  if (upper && lower) return "finite-n estimate with Fekete upper and (H2) lower brackets";
  if (upper) return "finite-n estimate with Fekete upper bracket";
  if (lower) return "finite-n estimate with (H2) lower bracket";
  return "finite-n estimate, no convergence certificate";
}

}  // namespace

PressureEstimate pressure_estimate(const PressureSequence& seq, double q,
                                   const std::optional<H2Certificate>& certificate) {
  if (seq.n_max() < 2) throw InvalidArgument("n_max must be >= 2");
  PressureEstimate est;
  est.n = seq.n_max();
  est.value = seq.finite_pressure(q, est.n);
  est.upper = seq.fekete_upper(q);
  est.lower = certified_lower(seq, q, certificate);
  est.label = bracket_label(est.upper.has_value(), est.lower.has_value());
  return est;
}

PressureEstimate pressure_estimate(const ShiftSpace& space, const WordPotential& phi, double q, std::size_t n_max,
                                   const std::optional<H2Certificate>& certificate) {
  return pressure_estimate(PressureSequence(space, phi, n_max), q, certificate);
}

QDomain default_domain(const WordPotential& phi) {
  return phi.structure() == Structure::Additive ? QDomain::AllQ : QDomain::PositiveQ;
}

namespace {

void validate_grid(std::span<const double> q_grid, QDomain domain) {
  if (q_grid.empty()) throw InvalidArgument("empty q grid");
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    if (!std::isfinite(q_grid[i])) throw InvalidArgument("q grid entries must be finite");
    if (i > 0 && !(q_grid[i] > q_grid[i - 1])) throw InvalidArgument("q grid must be strictly increasing");
    if (domain == QDomain::PositiveQ && !(q_grid[i] > 0.0))
      throw InvalidArgument("q grid must be positive for a sub-additive potential");
  }
}

}  // namespace

PressureCurve pressure_curve(const PressureSequence& seq, std::span<const double> q_grid,
                             std::optional<QDomain> domain, const std::optional<H2Certificate>& certificate) {
  PressureCurve curve;
  curve.domain = domain.value_or(default_domain(seq.potential()));
  validate_grid(q_grid, curve.domain);
  curve.n = seq.n_max();
  curve.q_grid.assign(q_grid.begin(), q_grid.end());
  bool any_upper = false, any_lower = false;
  for (double q : q_grid) {
    curve.values.push_back(seq.finite_pressure(q, curve.n));
    curve.upper.push_back(seq.fekete_upper(q));
    curve.lower.push_back(certified_lower(seq, q, certificate));
    any_upper = any_upper || curve.upper.back().has_value();
    any_lower = any_lower || curve.lower.back().has_value();
  }
  curve.convexity_defect = convexity_defect(curve.q_grid, curve.values);
  curve.label = bracket_label(any_upper, any_lower);
  return curve;
}

PressureCurve pressure_curve(const ShiftSpace& space, const WordPotential& phi, std::span<const double> q_grid,
                             std::size_t n, std::optional<QDomain> domain, bool with_brackets,
                             const std::optional<H2Certificate>& certificate) {
  if (with_brackets) return pressure_curve(PressureSequence(space, phi, n), q_grid, domain, certificate);
  PressureCurve curve;
  curve.domain = domain.value_or(default_domain(phi));
  validate_grid(q_grid, curve.domain);
  const LevelStatistics lvl = level_statistics(space, phi, n);
  curve.n = n;
  curve.q_grid.assign(q_grid.begin(), q_grid.end());
  for (double q : q_grid) {
    curve.values.push_back(lvl.pressure(q));
    curve.upper.emplace_back();
    curve.lower.emplace_back();
  }
  curve.convexity_defect = convexity_defect(curve.q_grid, curve.values);
  curve.label = bracket_label(false, false);
  return curve;
}

// ---------------------------------------------------------------------------

double JointLevelStatistics::log_sum(std::span<const double> q) const {
  if (q.size() != k) throw InvalidArgument("coefficient vector has wrong dimension");
  std::vector<double> terms;
  terms.reserve(tuples.size());
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    ExtReal total = 0.0;
    for (std::size_t j = 0; j < k; ++j) total = total + scale(q[j], tuples[i][j]);
    if (total.is_finite()) terms.push_back(total.value() + std::log(static_cast<double>(counts[i])));
  }
  if (terms.empty()) throw DomainError("cylinder sum is empty: the combined potential vanishes on every word");
  const double top = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

namespace {

struct JointCollector {
  std::vector<std::unique_ptr<PotentialCursor>>& cursors;
  std::vector<double>& flat;
  bool enter(Symbol s) {
    for (auto& c : cursors) c->push(s);
    return true;
  }
  void leave() {
    for (auto& c : cursors) c->pop();
  }
  void leaf(std::span<const Symbol>) {
    for (auto& c : cursors) flat.push_back(c->value().as_double());
  }
};

}  // namespace

JointLevelStatistics joint_level_statistics(const ShiftSpace& space, std::span<const WordPotential> phis,
                                            std::size_t n) {
  if (phis.empty()) throw InvalidArgument("need at least one potential");
  space.check_budget(n);
  const std::size_t k = phis.size();
  const std::vector<Word> prefixes = space.partition_prefixes(n, kPartitions);
  std::vector<std::vector<double>> flats(prefixes.size());
  parallel_for(prefixes.size(), [&](std::size_t i) {
    std::vector<std::unique_ptr<PotentialCursor>> cursors;
    for (const auto& p : phis) cursors.push_back(p.cursor());
    JointCollector c{cursors, flats[i]};
    walk_words(space, n, prefixes[i], c);
  });
  std::vector<double> flat;
  for (auto& f : flats) flat.insert(flat.end(), f.begin(), f.end());
  const std::size_t words = flat.size() / k;
  std::vector<std::size_t> order(words);
  std::iota(order.begin(), order.end(), 0);
  auto row = [&](std::size_t i) { return std::span<const double>(flat).subspan(i * k, k); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = row(a), rb = row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  JointLevelStatistics out;
  out.n = n;
  out.k = k;
  const std::span<const double> none;
  std::span<const double> prev = none;
  for (std::size_t idx : order) {
    const auto r = row(idx);
    if (!prev.empty() && std::equal(r.begin(), r.end(), prev.begin())) {
      ++out.counts.back();
      continue;
    }
    std::vector<ExtReal> tuple;
    for (double v : r) tuple.push_back(std::isinf(v) ? ExtReal::neg_infinity() : ExtReal(v));
    out.tuples.push_back(std::move(tuple));
    out.counts.push_back(1);
    prev = r;
  }
  return out;
}

double pressure_kd(const ShiftSpace& space, std::span<const WordPotential> phis, std::span<const double> q,
                   std::size_t n) {
  if (phis.size() != q.size()) throw InvalidArgument("coefficient/potential count mismatch");
  return joint_level_statistics(space, phis, n).pressure(q);
}

double variational_gap(const ShiftSpace& space, const WordPotential& phi, double q, const MarkovMeasure& mu,
                       std::size_t n) {
  const double p = finite_pressure(space, phi, q, n);
  const ExtReal star = cylinder_expectation(space, mu, phi, n);
  if (!star.is_finite()) {
    if (q > 0.0) return std::numeric_limits<double>::infinity();
    if (q < 0.0) throw DomainError("negative q with Phi_*(mu) = -inf");
    return p - entropy(mu);
  }
  return p - (entropy(mu) + q * star.value());
}

}  // namespace thermoform
