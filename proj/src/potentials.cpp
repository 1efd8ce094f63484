#include "thermoform/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace thermoform {

const char* to_string(Structure s) {
  switch (s) {
    case Structure::Additive: return "additive";
    case Structure::SubAdditive: return "sub-additive";
    case Structure::Unknown: return "unknown";
  }
  return "unknown";
}

namespace {

class BufferingCursor final : public PotentialCursor {
 public:
  explicit BufferingCursor(const PotentialModel& model) : model_(model) {}
  void push(Symbol s) override { word_.push_back(s); }
  void pop() override { word_.pop_back(); }
  ExtReal value() const override { return model_.evaluate(word_); }

 private:
  const PotentialModel& model_;
  Word word_;
};

class FunctionModel final : public PotentialModel {
 public:
  explicit FunctionModel(WordPotential::Function fn) : fn_(std::move(fn)) {}
  ExtReal evaluate(std::span<const Symbol> word) const override { return fn_(word); }

 private:
  WordPotential::Function fn_;
};

}  // namespace

std::unique_ptr<PotentialCursor> PotentialModel::cursor() const {
  return std::make_unique<BufferingCursor>(*this);
}

WordPotential::WordPotential(std::shared_ptr<const PotentialModel> model, Structure structure,
                             std::string description)
    : model_(std::move(model)), structure_(structure), description_(std::move(description)) {
  if (!model_) throw InvalidArgument("null potential model");
}

WordPotential WordPotential::from_function(Function fn, Structure structure, std::string description) {
  return WordPotential(std::make_shared<FunctionModel>(std::move(fn)), structure, std::move(description));
}

const AdditiveWindowPotential* WordPotential::window_table() const { return model_->window_table(); }

// ---------------------------------------------------------------------------
// Additive window potentials

AdditiveWindowPotential::AdditiveWindowPotential(const ShiftSpace& space, std::size_t window)
    : space_(space), window_(window), alphabet_size_(space.alphabet_size()) {
  if (window == 0) throw InvalidArgument("window must be >= 1");
  std::size_t size = 1;
  for (std::size_t i = 0; i < window; ++i) {
    if (size > (std::size_t{1} << 26) / alphabet_size_) throw BudgetExceeded("window table too large");
    size *= alphabet_size_;
  }
  table_.assign(size, std::numeric_limits<double>::quiet_NaN());
}

std::size_t AdditiveWindowPotential::index(std::span<const Symbol> w) const {
  std::size_t idx = 0;
  for (Symbol s : w) idx = idx * alphabet_size_ + s;
  return idx;
}

AdditiveWindowPotential AdditiveWindowPotential::from_entries(
    const ShiftSpace& space, std::size_t window, const std::vector<std::pair<Word, double>>& entries) {
  AdditiveWindowPotential g(space, window);
  for (const auto& [w, v] : entries) {
    if (w.size() != window || !space.is_admissible(w))
      throw InvalidArgument("window entry is not an admissible word of length " + std::to_string(window));
    if (!std::isfinite(v)) throw InvalidArgument("window table entries must be finite");
    double& slot = g.table_[g.index(w)];
    if (!std::isnan(slot)) throw InvalidArgument("duplicate window entry");
    slot = v;
  }
  for_each_word(space, window, [&](std::span<const Symbol> w) {
    if (std::isnan(g.table_[g.index(w)])) throw InvalidArgument("window table is missing an admissible word");
  });
  return g;
}

AdditiveWindowPotential AdditiveWindowPotential::from_symbol_values(const ShiftSpace& space,
                                                                    std::span<const double> values) {
  if (values.size() != space.alphabet_size()) throw InvalidArgument("one value per symbol required");
  std::vector<std::pair<Word, double>> entries;
  for (std::size_t s = 0; s < values.size(); ++s) entries.push_back({Word{static_cast<Symbol>(s)}, values[s]});
  return from_entries(space, 1, entries);
}

AdditiveWindowPotential AdditiveWindowPotential::constant(const ShiftSpace& space, double c) {
  std::vector<double> values(space.alphabet_size(), c);
  return from_symbol_values(space, values);
}

double AdditiveWindowPotential::at(std::span<const Symbol> w) const {
  if (w.size() != window_) throw InvalidArgument("window word has wrong length");
  const double v = table_[index(w)];
  if (std::isnan(v)) throw InvalidArgument("window word is not admissible");
  return v;
}

std::vector<std::pair<Word, double>> AdditiveWindowPotential::entries() const {
  std::vector<std::pair<Word, double>> out;
  for_each_word(space_, window_, [&](std::span<const Symbol> w) {
    out.push_back({Word(w.begin(), w.end()), table_[index(w)]});
  });
  return out;
}

namespace {

class BirkhoffModel final : public PotentialModel {
 public:
  explicit BirkhoffModel(AdditiveWindowPotential g) : g_(std::move(g)) {}

  ExtReal evaluate(std::span<const Symbol> word) const override {
    const std::size_t k = g_.window();
    double sum = 0.0;
    for (std::size_t j = 0; j + k <= word.size(); ++j) sum += g_.at(word.subspan(j, k));
    return sum;
  }

  std::unique_ptr<PotentialCursor> cursor() const override;
  const AdditiveWindowPotential* window_table() const override { return &g_; }

  const AdditiveWindowPotential& table() const { return g_; }

 private:
  AdditiveWindowPotential g_;
};

class BirkhoffCursor final : public PotentialCursor {
 public:
  explicit BirkhoffCursor(const AdditiveWindowPotential& g) : g_(g) { sums_.push_back(0.0); }
  void push(Symbol s) override {
    word_.push_back(s);
    double next = sums_.back();
    const std::size_t k = g_.window();
    if (word_.size() >= k) next += g_.at(std::span<const Symbol>(word_).last(k));
    sums_.push_back(next);
  }
  void pop() override {
    word_.pop_back();
    sums_.pop_back();
  }
  ExtReal value() const override { return sums_.back(); }

 private:
  const AdditiveWindowPotential& g_;
  Word word_;
  std::vector<double> sums_;
};

std::unique_ptr<PotentialCursor> BirkhoffModel::cursor() const { return std::make_unique<BirkhoffCursor>(g_); }

}  // namespace

WordPotential birkhoff_potential(const ShiftSpace& space, const AdditiveWindowPotential& g) {
  if (g.alphabet_size() != space.alphabet_size()) throw InvalidArgument("window table alphabet mismatch");
  return WordPotential(std::make_shared<BirkhoffModel>(g), Structure::Additive,
                       "birkhoff sum, window " + std::to_string(g.window()));
}

// ---------------------------------------------------------------------------
// Linear combinations

namespace {

ExtReal combine(std::span<const double> q, std::span<const ExtReal> values) {
  ExtReal total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) total = total + scale(q[i], values[i]);
  return total;
}

class CombinationModel final : public PotentialModel {
 public:
  CombinationModel(std::vector<double> q, std::vector<WordPotential> phis)
      : q_(std::move(q)), phis_(std::move(phis)) {}

  ExtReal evaluate(std::span<const Symbol> word) const override {
    std::vector<ExtReal> values;
    values.reserve(phis_.size());
    for (const auto& p : phis_) values.push_back(p(word));
    return combine(q_, values);
  }

  std::unique_ptr<PotentialCursor> cursor() const override;

  const std::vector<double>& coefficients() const { return q_; }
  const std::vector<WordPotential>& parts() const { return phis_; }

 private:
  std::vector<double> q_;
  std::vector<WordPotential> phis_;
};

class CombinationCursor final : public PotentialCursor {
 public:
  explicit CombinationCursor(const CombinationModel& model) : model_(model) {
    for (const auto& p : model.parts()) children_.push_back(p.cursor());
  }
  void push(Symbol s) override {
    for (auto& c : children_) c->push(s);
  }
  void pop() override {
    for (auto& c : children_) c->pop();
  }
  ExtReal value() const override {
    ExtReal total = 0.0;
    const auto& q = model_.coefficients();
    for (std::size_t i = 0; i < children_.size(); ++i) total = total + scale(q[i], children_[i]->value());
    return total;
  }

 private:
  const CombinationModel& model_;
  std::vector<std::unique_ptr<PotentialCursor>> children_;
};

std::unique_ptr<PotentialCursor> CombinationModel::cursor() const {
  return std::make_unique<CombinationCursor>(*this);
}

}  // namespace

WordPotential linear_combination(std::span<const double> coefficients,
                                 std::span<const WordPotential> potentials) {
  if (coefficients.size() != potentials.size()) throw InvalidArgument("coefficient/potential count mismatch");
  if (potentials.empty()) throw InvalidArgument("empty linear combination");
  bool all_additive = true;
  bool all_subadditive = true;
  std::string desc;
  for (std::size_t i = 0; i < potentials.size(); ++i) {
    const Structure s = potentials[i].structure();
    const double q = coefficients[i];
    if (!std::isfinite(q)) throw InvalidArgument("non-finite coefficient");
    all_additive = all_additive && s == Structure::Additive;
    const bool term_sub = s == Structure::Additive || (s == Structure::SubAdditive && q >= 0.0);
    all_subadditive = all_subadditive && term_sub;
    if (i > 0) desc += " + ";
    desc += std::to_string(q) + "*(" + potentials[i].description() + ")";
  }
  const Structure flag = all_additive      ? Structure::Additive
                         : all_subadditive ? Structure::SubAdditive
                                           : Structure::Unknown;
  return WordPotential(
      std::make_shared<CombinationModel>(std::vector<double>(coefficients.begin(), coefficients.end()),
                                         std::vector<WordPotential>(potentials.begin(), potentials.end())),
      flag, desc);
}

WordPotential scaled(double c, const WordPotential& phi) {
  const double q[] = {c};
  return linear_combination(q, std::span<const WordPotential>(&phi, 1));
}

WordPotential shifted(const ShiftSpace& space, const WordPotential& phi, double c) {
  const double q[] = {1.0, 1.0};
  const WordPotential parts[] = {phi, birkhoff_potential(space, AdditiveWindowPotential::constant(space, c))};
  return linear_combination(q, parts);
}

// ---------------------------------------------------------------------------
// Measure potentials

namespace {

class MeasureModel final : public PotentialModel {
 public:
  explicit MeasureModel(MarkovMeasure mu) : mu_(std::move(mu)) {
    log_pi_ = mu_.stationary().array().log();
    log_p_ = mu_.transition().array().log();
  }

  ExtReal evaluate(std::span<const Symbol> word) const override {
    if (word.empty()) return 0.0;
    double v = log_pi_(word[0]);
    for (std::size_t i = 1; i < word.size(); ++i) v += log_p_(word[i - 1], word[i]);
    return v;
  }

  std::unique_ptr<PotentialCursor> cursor() const override;

  Eigen::VectorXd log_pi_;
  Eigen::MatrixXd log_p_;

 private:
  MarkovMeasure mu_;
};

class MeasureCursor final : public PotentialCursor {
 public:
  explicit MeasureCursor(const MeasureModel& m) : m_(m) { sums_.push_back(0.0); }
  void push(Symbol s) override {
    const double add = word_.empty() ? m_.log_pi_(s) : m_.log_p_(word_.back(), s);
    word_.push_back(s);
    sums_.push_back(sums_.back() + add);
  }
  void pop() override {
    word_.pop_back();
    sums_.pop_back();
  }
  ExtReal value() const override { return sums_.back(); }

 private:
  const MeasureModel& m_;
  Word word_;
  std::vector<double> sums_;
};

std::unique_ptr<PotentialCursor> MeasureModel::cursor() const { return std::make_unique<MeasureCursor>(*this); }

}  // namespace

double quasi_multiplicativity_constant(const MarkovMeasure& mu) {
  const auto& p = mu.transition();
  const auto& pi = mu.stationary();
  double c = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (p(i, j) > 0.0) c = std::max(c, p(i, j) / pi(j));
  return c;
}

WordPotential measure_potential(const ShiftSpace& space, const MarkovMeasure& mu) {
  if (!mu.fully_supported_on(space))
    throw InvalidArgument("measure must give positive mass to every admissible cylinder");
  const double c = quasi_multiplicativity_constant(mu);
  const Structure flag = std::isfinite(c) ? Structure::SubAdditive : Structure::Unknown;
  return WordPotential(std::make_shared<MeasureModel>(mu), flag,
                       "log cylinder mass (quasi-multiplicative, C=" + std::to_string(c) + ")");
}

// ---------------------------------------------------------------------------
// Additive approximation

AdditiveApproximation additive_approximation(const ShiftSpace& space, const WordPotential& phi,
                                             std::size_t window, std::size_t n_test) {
  if (window == 0) throw InvalidArgument("window must be >= 1");
  if (n_test < 2 * window) throw InvalidArgument("n_test must be at least twice the window");
  space.check_budget(window);
  space.check_budget(n_test);

  std::vector<std::pair<Word, double>> entries;
  for_each_word(space, window, [&](std::span<const Symbol> w) {
    const ExtReal v = phi(w);
    if (!v.is_finite())
      throw DomainError("potential is -inf on a window; no additive approximation exists");
    entries.push_back({Word(w.begin(), w.end()), v.value() / static_cast<double>(window)});
  });
  AdditiveApproximation result{AdditiveWindowPotential::from_entries(space, window, entries), 0.0};

  Word cyc(window);
  bool any = false;
  for_each_word(space, n_test, [&](std::span<const Symbol> word) {
    if (!space.allowed(word.back(), word.front())) return;
    // Cyclic windows of a cyclically admissible word are admissible.
    double approx = 0.0;
    for (std::size_t j = 0; j < n_test; ++j) {
      for (std::size_t i = 0; i < window; ++i) cyc[i] = word[(j + i) % n_test];
      approx += result.table.at(cyc);
    }
    const ExtReal v = phi(word);
    const double diff = v.is_finite() ? std::abs(v.value() - approx) : std::numeric_limits<double>::infinity();
    result.defect = std::max(result.defect, diff / static_cast<double>(n_test));
    any = true;
  });
  if (!any) throw DomainError("no cyclically admissible words of the test length");
  return result;
}

}  // namespace thermoform
