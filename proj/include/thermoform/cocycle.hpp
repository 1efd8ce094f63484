#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "thermoform/potentials.hpp"
#include "thermoform/symbolic.hpp"

namespace thermoform {

/// One real d x d matrix per symbol; the word x1...xn maps to M_{x1}...M_{xn}.
class MatrixCocycle {
 public:
  explicit MatrixCocycle(std::vector<Eigen::MatrixXd> matrices);

  std::size_t dimension() const { return dimension_; }
  std::size_t alphabet_size() const { return matrices_.size(); }
  const std::vector<Eigen::MatrixXd>& matrices() const { return matrices_; }
  const Eigen::MatrixXd& operator[](Symbol s) const { return matrices_[s]; }

  /// Left-to-right product; empty word gives the identity.
  Eigen::MatrixXd product(std::span<const Symbol> word) const;

 private:
  std::size_t dimension_;
  std::vector<Eigen::MatrixXd> matrices_;
};

/// log of the operator norm of the word's matrix product; -inf on a zero
/// product. Flagged SubAdditive (norms are submultiplicative).
WordPotential norm_potential(const MatrixCocycle& cocycle);

/// log(sigma_1 ... sigma_j) of the word's product, singular values sorted
/// descending; -inf when sigma_j vanishes (numerical rank below j).
WordPotential singular_value_potential(const MatrixCocycle& cocycle, std::size_t j);

struct IrreducibilityVerdict {
  bool irreducible = false;
  /// Orthonormal basis (columns) of a proper invariant subspace when reducible.
  Eigen::MatrixXd witness;
};

/// Searches for a common invariant subspace by growing orbit spans
/// span{v, M_i v, M_i M_j v, ...} to stabilization. Start vectors are the
/// standard basis and the real (or real 2-plane) eigenspaces of every M_i;
/// the same search on the transposed family yields invariant complements.
/// Ranks use a relative singular-value threshold of 1e-10.
IrreducibilityVerdict check_irreducibility(const MatrixCocycle& cocycle);

/// max_i || (I - Q Q^T) M_i Q || for an orthonormal basis Q; 0 for an
/// exactly invariant subspace.
double invariance_defect(const MatrixCocycle& cocycle, const Eigen::MatrixXd& basis);

struct H1Report {
  bool holds = true;             // no pair violates Phi(IJ) <= Phi(I) + Phi(J)
  double max_violation = 0.0;    // largest positive defect (+inf if Phi(I)+Phi(J) = -inf < Phi(IJ))
  Word worst_prefix, worst_suffix;
  std::size_t pairs_checked = 0;
};

/// Relative rounding slack on H1 comparisons: log phi values of exactly
/// submultiplicative products may differ from the sum of the parts by a
/// few ulps.
inline constexpr double kH1RoundingSlack = 1e-13;

/// Exhaustive test of (H1) over all admissible I, J with |I| + |J| <= n_max.
H1Report check_h1(const ShiftSpace& space, const WordPotential& phi, std::size_t n_max);

struct H2Witness {
  Word prefix, bridge, suffix;
  double log_ratio;  // Phi(IKJ) - Phi(I) - Phi(J)
};

struct H2Certificate {
  std::size_t n = 0;
  std::size_t t_n = 0;  // longest bridge needed by an optimal choice
  double c_n = 0.0;     // min over pairs of the best ratio phi(IKJ)/(phi(I)phi(J))
  std::vector<H2Witness> witnesses;  // the worst pairs, ascending log ratio
};

/// Exhaustive (H2) search at base length n with bridges of length 0..t_max.
/// Returns nullopt when some pair admits no bridge with phi(IKJ) > 0.
/// Exponential in n and t_max; meant for small n.
std::optional<H2Certificate> search_h2(const ShiftSpace& space, const WordPotential& phi, std::size_t n,
                                       std::size_t t_max);

}  // namespace thermoform
