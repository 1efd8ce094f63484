#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermoform/extended_real.hpp"
#include "thermoform/markov.hpp"
#include "thermoform/symbolic.hpp"

namespace thermoform {

/// Declared structure of a potential. Advisory: code that needs
/// sub-additivity for correctness re-checks it (see check_h1).
enum class Structure { Additive, SubAdditive, Unknown };

const char* to_string(Structure s);

/// Incremental evaluator driven by walk_words: push/pop follow the DFS and
/// value() is log phi of the current word.
class PotentialCursor {
 public:
  virtual ~PotentialCursor() = default;
  virtual void push(Symbol s) = 0;
  virtual void pop() = 0;
  virtual ExtReal value() const = 0;
};

class AdditiveWindowPotential;

class PotentialModel {
 public:
  virtual ~PotentialModel() = default;
  virtual ExtReal evaluate(std::span<const Symbol> word) const = 0;
  /// Default cursor buffers the word and calls evaluate() on demand.
  virtual std::unique_ptr<PotentialCursor> cursor() const;
  virtual const AdditiveWindowPotential* window_table() const { return nullptr; }
};

/// log phi on finite words, as an immutable shared value object.
class WordPotential {
 public:
  WordPotential(std::shared_ptr<const PotentialModel> model, Structure structure,
                std::string description);

  using Function = std::function<ExtReal(std::span<const Symbol>)>;
  static WordPotential from_function(Function fn, Structure structure, std::string description);

  ExtReal operator()(std::span<const Symbol> word) const { return model_->evaluate(word); }
  ExtReal operator()(const Word& word) const { return model_->evaluate(std::span<const Symbol>(word)); }
  std::unique_ptr<PotentialCursor> cursor() const { return model_->cursor(); }

  Structure structure() const { return structure_; }
  const std::string& description() const { return description_; }
  /// The window table when this potential is a Birkhoff sum, else nullptr.
  const AdditiveWindowPotential* window_table() const;

 private:
  std::shared_ptr<const PotentialModel> model_;
  Structure structure_;
  std::string description_;
};

/// Locally constant g with window k: g(w) for admissible words w, |w| = k.
class AdditiveWindowPotential {
 public:
  /// Entries must cover every admissible length-k word exactly once.
  static AdditiveWindowPotential from_entries(const ShiftSpace& space, std::size_t window,
                                              const std::vector<std::pair<Word, double>>& entries);
  static AdditiveWindowPotential from_symbol_values(const ShiftSpace& space,
                                                    std::span<const double> values);
  static AdditiveWindowPotential constant(const ShiftSpace& space, double c);

  std::size_t window() const { return window_; }
  std::size_t alphabet_size() const { return alphabet_size_; }
  double at(std::span<const Symbol> window_word) const;
  /// (word, value) pairs in lexicographic order of the admissible windows.
  std::vector<std::pair<Word, double>> entries() const;

 private:
  AdditiveWindowPotential(const ShiftSpace& space, std::size_t window);
  std::size_t index(std::span<const Symbol> w) const;

  ShiftSpace space_;
  std::size_t window_;
  std::size_t alphabet_size_;
  std::vector<double> table_;  // base-m index; inadmissible slots unused
};

/// value(I) = sum of g over the |I|-k+1 windows of I; words shorter than the
/// window evaluate to 0.
WordPotential birkhoff_potential(const ShiftSpace& space, const AdditiveWindowPotential& g);

/// value(I) = sum_i q_i * Phi_i(I). A -inf value with a positive coefficient
/// gives -inf, with a zero coefficient contributes 0, and with a negative
/// coefficient makes evaluation throw DomainError.
WordPotential linear_combination(std::span<const double> coefficients,
                                 std::span<const WordPotential> potentials);
WordPotential scaled(double c, const WordPotential& phi);
/// phi + c per symbol, i.e. adds the Birkhoff sum of the constant c.
WordPotential shifted(const ShiftSpace& space, const WordPotential& phi, double c);

/// value(I) = log mu([I]). Requires full support; flagged SubAdditive since
/// the cylinder masses are quasi-multiplicative with constant
/// max_ij P_ij / pi_j.
WordPotential measure_potential(const ShiftSpace& space, const MarkovMeasure& mu);
/// The quasi-multiplicativity constant C with mu(IJ) <= C mu(I) mu(J).
double quasi_multiplicativity_constant(const MarkovMeasure& mu);

struct AdditiveApproximation {
  AdditiveWindowPotential table;  // g_k(w) = Phi(w) / k
  double defect;                  // max_I |Phi(I) - sum of g_k over cyclic windows| / n_test
};

/// Window-k additive approximation of Phi. The defect is measured over the
/// length-n_test words whose cyclic closure is admissible (all words on a full
/// shift), summing g_k over all n_test cyclic windows so that each position
/// is counted k times. Throws DomainError when Phi is -inf on a window.
AdditiveApproximation additive_approximation(const ShiftSpace& space, const WordPotential& phi,
                                             std::size_t window, std::size_t n_test);

}  // namespace thermoform
