#include "thermoform/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "thermoform/parallel.hpp"

namespace thermoform {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double entropy(const MarkovMeasure& mu) {
  const auto& p = mu.transition();
  const auto& pi = mu.stationary();
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (p(i, j) > 0.0) row -= p(i, j) * std::log(p(i, j));
    h += pi(i) * row;
  }
  return h;
}

double MeasureMixture::cylinder_mass(std::span<const Symbol> word) const {
  double m = 0.0;
  for (std::size_t i = 0; i < components.size(); ++i) m += weights[i] * components[i].cylinder_mass(word);
  return m;
}

namespace {

void validate_mixture(const ShiftSpace& space, const MeasureMixture& mu) {
  if (mu.weights.size() != mu.components.size() || mu.components.empty())
    throw InvalidArgument("mixture weights and components differ in length");
  double total = 0.0;
  for (double w : mu.weights) {
    if (!(w >= 0.0)) throw InvalidArgument("mixture weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("mixture weights must sum to 1");
  for (const auto& c : mu.components)
    if (!c.compatible_with(space)) throw InvalidArgument("measure is not supported on the shift space");
}

/// DFS carrying per-component cylinder masses; prunes null cylinders.
template <class Leaf>
struct MassWalker {
  const MeasureMixture& mu;
  Leaf on_leaf;
  std::vector<std::vector<double>> masses;  // masses[depth][component]
  Word word;

  bool enter(Symbol s) {
    std::vector<double> next(mu.components.size());
    double total = 0.0;
    for (std::size_t c = 0; c < next.size(); ++c) {
      const auto& comp = mu.components[c];
      next[c] = word.empty() ? comp.stationary()(s) : masses.back()[c] * comp.transition()(word.back(), s);
      total += mu.weights[c] * next[c];
    }
    if (!(total > 0.0)) return false;
    masses.push_back(std::move(next));
    word.push_back(s);
    return true;
  }
  void leave() {
    masses.pop_back();
    word.pop_back();
  }
  void leaf(std::span<const Symbol> w) {
    double total = 0.0;
    for (std::size_t c = 0; c < mu.components.size(); ++c) total += mu.weights[c] * masses.back()[c];
    on_leaf(w, total);
  }
};

template <class Leaf>
void walk_masses(const ShiftSpace& space, const MeasureMixture& mu, std::size_t n, Leaf leaf) {
  MassWalker<Leaf> walker{mu, std::move(leaf), {}, {}};
  walk_words(space, n, {}, walker);
}

}  // namespace

ExtReal cylinder_expectation(const ShiftSpace& space, const MeasureMixture& mu, const WordPotential& phi,
                             std::size_t n) {
  validate_mixture(space, mu);
  space.check_budget(n);
  double acc = 0.0;
  bool minus_inf = false;
  walk_masses(space, mu, n, [&](std::span<const Symbol> w, double mass) {
    if (minus_inf) return;
    const ExtReal v = phi(w);
    if (!v.is_finite()) {
      minus_inf = true;
      return;
    }
    acc += mass * v.value();
  });
  if (minus_inf) return ExtReal::neg_infinity();
  return acc / static_cast<double>(n);
}

double cylinder_entropy(const ShiftSpace& space, const MeasureMixture& mu, std::size_t n) {
  validate_mixture(space, mu);
  space.check_budget(n);
  double acc = 0.0;
  walk_masses(space, mu, n, [&](std::span<const Symbol>, double mass) { acc -= mass * std::log(mass); });
  return acc / static_cast<double>(n);
}

const char* to_string(PhiStarMethod m) {
  switch (m) {
    case PhiStarMethod::ExactAdditive: return "exact_additive";
    case PhiStarMethod::CylinderExpectation: return "cylinder_expectation";
    case PhiStarMethod::MonteCarloKingman: return "monte_carlo_kingman";
  }
  return "unknown";
}

PhiStarEstimate phi_star(const ShiftSpace& space, const MarkovMeasure& mu, const WordPotential& phi,
                         const PhiStarOptions& options) {
  if (!mu.compatible_with(space)) throw InvalidArgument("measure is not supported on the shift space");
  PhiStarEstimate est{ExtReal(0.0), 0.0, options.method, options.n, 0};
  switch (options.method) {
    case PhiStarMethod::ExactAdditive: {
      const AdditiveWindowPotential* g = phi.window_table();
      if (g == nullptr) throw InvalidArgument("ExactAdditive requires a Birkhoff potential");
      double acc = 0.0;
      for (const auto& [w, v] : g->entries()) acc += mu.cylinder_mass(w) * v;
      est.value = acc;
      est.n = g->window();
      break;
    }
    case PhiStarMethod::CylinderExpectation:
      if (options.n < 1) throw InvalidArgument("n must be >= 1");
      est.value = cylinder_expectation(space, mu, phi, options.n);
      break;
    case PhiStarMethod::MonteCarloKingman: {
      if (options.n < 1 || options.samples < 2) throw InvalidArgument("need n >= 1 and at least 2 samples");
      est.seed = options.seed;
      Rng seeder(options.seed);
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t s = 0; s < options.samples; ++s) {
        const Word w = sample_trajectory(mu, options.n, seeder.next());
        const ExtReal v = phi(w);
        if (!v.is_finite()) {
          est.value = ExtReal::neg_infinity();
          return est;
        }
        const double x = v.value() / static_cast<double>(options.n);
        sum += x;
        sum_sq += x * x;
      }
      const double k = static_cast<double>(options.samples);
      const double mean = sum / k;
      const double var = std::max(0.0, (sum_sq - k * mean * mean) / (k - 1.0));
      est.value = mean;
      est.std_error = std::sqrt(var / k);
      break;
    }
  }
  return est;
}

double affinity_check(const ShiftSpace& space, const MarkovMeasure& mu1, const MarkovMeasure& mu2, double p,
                      const WordPotential& phi, std::size_t n) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("mixing weight must lie in (0, 1]");
  const ExtReal e1 = cylinder_expectation(space, mu1, phi, n);
  if (p == 1.0) {
    const ExtReal mixed = cylinder_expectation(space, MeasureMixture{{1.0}, {mu1}}, phi, n);
    return mixed == e1 ? 0.0 : std::abs(mixed.as_double() - e1.as_double());
  }
  const ExtReal e2 = cylinder_expectation(space, mu2, phi, n);
  const ExtReal mixed = cylinder_expectation(space, MeasureMixture{{p, 1.0 - p}, {mu1, mu2}}, phi, n);
  const ExtReal combo = scale(p, e1) + scale(1.0 - p, e2);
  if (!mixed.is_finite() || !combo.is_finite()) return mixed == combo ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(mixed.value() - combo.value());
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kLogitBound = 40.0;

class EquilibriumProblem {
 public:
  EquilibriumProblem(const ShiftSpace& space, const WordPotential& phi, double q, std::size_t n)
      : space_(space), q_(q), n_(n), m_(space.alphabet_size()) {
    space.check_budget(n);
    for_each_word(space, n, [&](std::span<const Symbol> w) { values_.push_back(phi(w)); });
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < m_; ++j)
        if (space.allowed(static_cast<Symbol>(i), static_cast<Symbol>(j))) params_.push_back({i, j});
  }

  std::size_t dimension() const { return params_.size(); }
  const std::vector<std::pair<std::size_t, std::size_t>>& params() const { return params_; }

  Eigen::MatrixXd transition(const std::vector<double>& theta) const {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd logits = Eigen::MatrixXd::Constant(m, m, -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < params_.size(); ++k)
      logits(static_cast<Eigen::Index>(params_[k].first), static_cast<Eigen::Index>(params_[k].second)) = theta[k];
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double top = logits.row(i).maxCoeff();
      double z = 0.0;
      for (Eigen::Index j = 0; j < m; ++j)
        if (std::isfinite(logits(i, j))) z += std::exp(logits(i, j) - top);
      for (Eigen::Index j = 0; j < m; ++j)
        if (std::isfinite(logits(i, j))) p(i, j) = std::exp(logits(i, j) - top) / z;
      p.row(i) /= p.row(i).sum();
    }
    return p;
  }

  struct Evaluation {
    double objective = -std::numeric_limits<double>::infinity();
    double entropy = 0.0;
    ExtReal star;
  };

  Evaluation evaluate(const std::vector<double>& theta) const {
    Evaluation ev;
    MarkovMeasure mu = MarkovMeasure::bernoulli(std::vector<double>(m_, 1.0 / static_cast<double>(m_)));
    try {
      mu = MarkovMeasure::from_transition(transition(theta));
    } catch (const InvalidArgument&) {
      return ev;
    }
    ev.entropy = entropy(mu);
    // Masses along the DFS; index follows the enumeration order of values_.
    std::vector<double> mass{1.0};
    Word word;
    std::size_t index = 0;
    double acc = 0.0;
    bool minus_inf = false;
    struct V {
      const MarkovMeasure& mu;
      std::vector<double>& mass;
      Word& word;
      const std::vector<ExtReal>& values;
      std::size_t& index;
      double& acc;
      bool& minus_inf;
      bool enter(Symbol s) {
        const double next = word.empty() ? mu.stationary()(s) : mass.back() * mu.transition()(word.back(), s);
        mass.push_back(next);
        word.push_back(s);
        return true;
      }
      void leave() {
        mass.pop_back();
        word.pop_back();
      }
      void leaf(std::span<const Symbol>) {
        const ExtReal& v = values[index++];
        if (mass.back() <= 0.0) return;
        if (!v.is_finite())
          minus_inf = true;
        else
          acc += mass.back() * v.value();
      }
    } visitor{mu, mass, word, values_, index, acc, minus_inf};
    walk_words(space_, n_, {}, visitor);
    if (minus_inf) {
      ev.star = ExtReal::neg_infinity();
      if (q_ > 0.0) return ev;
      if (q_ < 0.0) throw DomainError("negative q with Phi_*(mu) = -inf");
      ev.objective = ev.entropy;
      return ev;
    }
    ev.star = acc / static_cast<double>(n_);
    ev.objective = ev.entropy + q_ * ev.star.value();
    return ev;
  }

  std::size_t alphabet_size() const { return m_; }

 private:
  const ShiftSpace& space_;
  double q_;
  std::size_t n_;
  std::size_t m_;
  std::vector<ExtReal> values_;
  std::vector<std::pair<std::size_t, std::size_t>> params_;
};

struct AscentResult {
  std::vector<double> theta;
  EquilibriumProblem::Evaluation eval;
};

AscentResult coordinate_ascent(const EquilibriumProblem& prob, std::vector<double> theta, std::size_t sweeps) {
  auto current = prob.evaluate(theta);
  std::vector<double> step(theta.size(), 0.5);
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t k = 0; k < theta.size(); ++k) {
      bool moved = false;
      for (double sign : {1.0, -1.0}) {
        std::vector<double> trial = theta;
        trial[k] = std::clamp(trial[k] + sign * step[k], -kLogitBound, kLogitBound);
        if (trial[k] == theta[k]) continue;
        const auto ev = prob.evaluate(trial);
        if (ev.objective > current.objective) {
          theta = std::move(trial);
          current = ev;
          step[k] = std::min(step[k] * 2.0, 8.0);
          moved = true;
          break;
        }
      }
      if (!moved) step[k] *= 0.5;
    }
    if (*std::max_element(step.begin(), step.end()) < 1e-10) break;
  }
  return {std::move(theta), current};
}

}  // namespace

EquilibriumResult equilibrium_search(const ShiftSpace& space, const WordPotential& phi, double q,
                                     const EquilibriumOptions& options) {
  if (options.restarts == 0) throw InvalidArgument("need at least one restart");
  if (options.n < 1) throw InvalidArgument("n must be >= 1");
  const EquilibriumProblem prob(space, phi, q, options.n);
  const std::size_t m = prob.alphabet_size();

  std::vector<std::vector<double>> starts;
  Rng rng(options.seed);
  for (std::size_t r = 0; r < options.restarts; ++r) {
    std::vector<double> theta(prob.dimension(), 0.0);
    if (r >= 1 && r <= m) {
      for (std::size_t k = 0; k < theta.size(); ++k)
        if (prob.params()[k].second == r - 1) theta[k] = 4.0;
    } else if (r > m) {
      for (auto& t : theta) t = 1.5 * rng.normal();
    }
    starts.push_back(std::move(theta));
  }

  std::vector<AscentResult> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t r) { results[r] = coordinate_ascent(prob, starts[r], options.iterations); });

  std::size_t best = 0;
  std::vector<double> objectives;
  for (std::size_t r = 0; r < results.size(); ++r) {
    objectives.push_back(results[r].eval.objective);
    if (results[r].eval.objective > results[best].eval.objective) best = r;
  }
  const auto& win = results[best];
  if (!std::isfinite(win.eval.objective)) throw DomainError("no restart reached a finite objective");
  return {MarkovMeasure::from_transition(prob.transition(win.theta)),
          win.eval.objective,
          win.eval.entropy,
          win.eval.star,
          best,
          std::move(objectives)};
}

Word sample_trajectory(const MarkovMeasure& mu, std::size_t length, std::uint64_t seed) {
  if (length < 1) throw InvalidArgument("trajectory length must be >= 1");
  Rng rng(seed);
  const auto m = static_cast<Eigen::Index>(mu.alphabet_size());
  auto draw = [&](auto&& prob) {
    const double u = rng.uniform();
    double acc = 0.0;
    Eigen::Index last = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (prob(j) <= 0.0) continue;
      last = j;
      acc += prob(j);
      if (u < acc) return static_cast<Symbol>(j);
    }
    return static_cast<Symbol>(last);
  };
  Word w;
  w.reserve(length);
  w.push_back(draw([&](Eigen::Index j) { return mu.stationary()(j); }));
  while (w.size() < length) {
    const Symbol prev = w.back();
    w.push_back(draw([&](Eigen::Index j) { return mu.transition()(prev, j); }));
  }
  return w;
}

}  // namespace thermoform
