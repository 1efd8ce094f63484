#include "thermoform/markov.hpp"

#include <cmath>
#include <string>

namespace thermoform {

namespace {

void validate_stochastic(const Eigen::MatrixXd& p) {
  if (p.rows() < 2 || p.rows() != p.cols())
    throw InvalidArgument("transition matrix must be square with at least two states");
  if (!p.allFinite()) throw InvalidArgument("transition matrix has non-finite entries");
  if ((p.array() < 0.0).any()) throw InvalidArgument("transition matrix has negative entries");
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    if (std::abs(p.row(i).sum() - 1.0) > 1e-12)
      throw InvalidArgument("row " + std::to_string(i) + " does not sum to 1");
}

}  // namespace

MarkovMeasure::MarkovMeasure(Eigen::MatrixXd p, Eigen::VectorXd pi)
    : transition_(std::move(p)), stationary_(std::move(pi)) {}

MarkovMeasure MarkovMeasure::from_transition(Eigen::MatrixXd transition) {
  validate_stochastic(transition);
  const Eigen::Index m = transition.rows();
  // pi (P - I) = 0 with one equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a = transition.transpose() - Eigen::MatrixXd::Identity(m, m);
  a.row(m - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(m - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-12);
  if (lu.rank() < m) throw InvalidArgument("stationary distribution is not unique; supply it explicitly");
  Eigen::VectorXd pi = lu.solve(rhs);
  for (auto& x : pi)
    if (x < 0.0 && x > -1e-14) x = 0.0;
  pi /= pi.sum();
  return from_transition(std::move(transition), std::move(pi));
}

MarkovMeasure MarkovMeasure::from_transition(Eigen::MatrixXd transition, Eigen::VectorXd stationary) {
  validate_stochastic(transition);
  if (stationary.size() != transition.rows()) throw InvalidArgument("stationary vector has wrong length");
  if ((stationary.array() < 0.0).any()) throw InvalidArgument("stationary vector has negative entries");
  if (std::abs(stationary.sum() - 1.0) > 1e-12) throw InvalidArgument("stationary vector does not sum to 1");
  if (((stationary.transpose() * transition) - stationary.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidArgument("vector is not stationary for the transition matrix");
  return MarkovMeasure(std::move(transition), std::move(stationary));
}

MarkovMeasure MarkovMeasure::bernoulli(std::span<const double> weights) {
  const auto m = static_cast<Eigen::Index>(weights.size());
  if (m < 2) throw InvalidArgument("Bernoulli measure needs at least two symbols");
  Eigen::VectorXd pi(m);
  for (Eigen::Index i = 0; i < m; ++i) pi(i) = weights[i];
  Eigen::MatrixXd p = pi.transpose().replicate(m, 1);
  return from_transition(std::move(p), std::move(pi));
}

MarkovMeasure MarkovMeasure::dirac(std::size_t alphabet_size, Symbol s) {
  if (s >= alphabet_size) throw InvalidArgument("symbol outside alphabet");
  const auto m = static_cast<Eigen::Index>(alphabet_size);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m, m);
  p.col(s).setOnes();
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(m);
  pi(s) = 1.0;
  return from_transition(std::move(p), std::move(pi));
}

bool MarkovMeasure::compatible_with(const ShiftSpace& space) const {
  if (space.alphabet_size() != alphabet_size()) return false;
  for (Eigen::Index a = 0; a < transition_.rows(); ++a)
    for (Eigen::Index b = 0; b < transition_.cols(); ++b)
      if (transition_(a, b) > 0.0 && !space.allowed(static_cast<Symbol>(a), static_cast<Symbol>(b)))
        return false;
  return true;
}

bool MarkovMeasure::fully_supported_on(const ShiftSpace& space) const {
  if (!compatible_with(space)) return false;
  for (Eigen::Index a = 0; a < transition_.rows(); ++a) {
    if (stationary_(a) <= 0.0) return false;
    for (Eigen::Index b = 0; b < transition_.cols(); ++b)
      if (space.allowed(static_cast<Symbol>(a), static_cast<Symbol>(b)) && transition_(a, b) <= 0.0)
        return false;
  }
  return true;
}

double MarkovMeasure::cylinder_mass(std::span<const Symbol> word) const {
  if (word.empty()) return 1.0;
  double mass = stationary_(word[0]);
  for (std::size_t i = 1; i < word.size() && mass > 0.0; ++i) mass *= transition_(word[i - 1], word[i]);
  return mass;
}

}  // namespace thermoform
