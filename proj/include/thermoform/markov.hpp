#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "thermoform/symbolic.hpp"

namespace thermoform {

/// Stationary order-1 Markov measure on a shift space. Bernoulli measures
/// are the special case of identical rows.
class MarkovMeasure {
 public:
  /// Computes the stationary vector; throws InvalidArgument when it is not
  /// unique (reducible chains must supply it explicitly).
  static MarkovMeasure from_transition(Eigen::MatrixXd transition);
  static MarkovMeasure from_transition(Eigen::MatrixXd transition, Eigen::VectorXd stationary);
  static MarkovMeasure bernoulli(std::span<const double> weights);
  /// Point mass on the fixed point s s s ...
  static MarkovMeasure dirac(std::size_t alphabet_size, Symbol s);

  std::size_t alphabet_size() const { return static_cast<std::size_t>(transition_.rows()); }
  const Eigen::MatrixXd& transition() const { return transition_; }
  const Eigen::VectorXd& stationary() const { return stationary_; }

  /// supp(P) is contained in the allowed transitions of `space`.
  bool compatible_with(const ShiftSpace& space) const;
  /// Every admissible cylinder of `space` has positive mass.
  bool fully_supported_on(const ShiftSpace& space) const;

  double cylinder_mass(std::span<const Symbol> word) const;

 private:
  MarkovMeasure(Eigen::MatrixXd p, Eigen::VectorXd pi);
  Eigen::MatrixXd transition_;
  Eigen::VectorXd stationary_;
};

}  // namespace thermoform
