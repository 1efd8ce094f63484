#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "thermoform/extended_real.hpp"
#include "thermoform/markov.hpp"
#include "thermoform/potentials.hpp"
#include "thermoform/symbolic.hpp"

namespace thermoform {

/// xoshiro256** seeded through splitmix64. Output is identical on every
/// platform, unlike the standard distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  double uniform();  // [0, 1)
  double normal();

 private:
  std::uint64_t s_[4];
};

/// -sum_i pi_i sum_j P_ij log P_ij, with 0 log 0 = 0.
double entropy(const MarkovMeasure& mu);

/// Finite convex combination of Markov measures, evaluated on cylinders by
/// mixing masses (the mixture is generally not Markov).
struct MeasureMixture {
  std::vector<double> weights;
  std::vector<MarkovMeasure> components;

  static MeasureMixture single(const MarkovMeasure& mu) { return {{1.0}, {mu}}; }
  double cylinder_mass(std::span<const Symbol> word) const;
};

/// (1/n) sum_{|I|=n} mu([I]) Phi(I), skipping null cylinders. -inf when
/// Phi = -inf on a cylinder of positive mass. For sub-additive Phi the values
/// at n = 1, 2, 4, 8, ... are non-increasing and bound Phi_*(mu) from above.
ExtReal cylinder_expectation(const ShiftSpace& space, const MeasureMixture& mu, const WordPotential& phi,
                             std::size_t n);
inline ExtReal cylinder_expectation(const ShiftSpace& space, const MarkovMeasure& mu, const WordPotential& phi,
                                    std::size_t n) {
  return cylinder_expectation(space, MeasureMixture::single(mu), phi, n);
}

/// -(1/n) sum_{|I|=n} mu([I]) log mu([I]).
double cylinder_entropy(const ShiftSpace& space, const MeasureMixture& mu, std::size_t n);

enum class PhiStarMethod { ExactAdditive, CylinderExpectation, MonteCarloKingman };
const char* to_string(PhiStarMethod m);

struct PhiStarOptions {
  PhiStarMethod method = PhiStarMethod::CylinderExpectation;
  std::size_t n = 8;              // word length (CylinderExpectation, MonteCarloKingman)
  std::size_t samples = 1000;     // MonteCarloKingman
  std::uint64_t seed = 1;         // MonteCarloKingman
};

struct PhiStarEstimate {
  ExtReal value;
  double std_error = 0.0;  // 0 for the deterministic methods
  PhiStarMethod method;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

/// Estimates Phi_*(mu) = lim (1/n) int log phi_n dmu. ExactAdditive needs a
/// Birkhoff potential and returns sum_{|w|=k} mu([w]) g(w).
PhiStarEstimate phi_star(const ShiftSpace& space, const MarkovMeasure& mu, const WordPotential& phi,
                         const PhiStarOptions& options = {});

/// |E(p mu1 + (1-p) mu2) - p E(mu1) - (1-p) E(mu2)| for the length-n
/// cylinder expectation E.
double affinity_check(const ShiftSpace& space, const MarkovMeasure& mu1, const MarkovMeasure& mu2, double p,
                      const WordPotential& phi, std::size_t n);

struct EquilibriumOptions {
  std::size_t restarts = 8;
  std::size_t iterations = 200;  // coordinate-ascent sweeps per restart
  std::size_t n = 8;             // cylinder length for Phi_*
  std::uint64_t seed = 1;
};

struct EquilibriumResult {
  MarkovMeasure measure;
  double objective;            // h_mu + q * cylinder expectation
  double entropy;
  ExtReal phi_star;
  std::size_t restart;         // index of the winning restart
  std::vector<double> restart_objectives;
};

/// Maximizes h_mu + q Phi_*(mu) over Markov measures compatible with the
/// space. Rows are softmax-parameterized over allowed transitions and
/// improved by coordinate ascent with step adaptation; only improving moves
/// are accepted. Restart 0 starts from uniform logits, restarts 1..m from
/// chains biased toward each symbol, the rest from seeded random logits.
/// The cylinder expectation bounds Phi_* from above for sub-additive
/// potentials, so the objective is a lower bound on finite_pressure(q, n)
/// only up to that bias (exact for Birkhoff potentials).
EquilibriumResult equilibrium_search(const ShiftSpace& space, const WordPotential& phi, double q,
                                     const EquilibriumOptions& options = {});

/// Markov-chain path of the given length started from the stationary law.
Word sample_trajectory(const MarkovMeasure& mu, std::size_t length, std::uint64_t seed);

}  // namespace thermoform
