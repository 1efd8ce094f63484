#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "thermoform/cocycle.hpp"
#include "thermoform/potentials.hpp"
#include "thermoform/symbolic.hpp"

namespace testing {

using namespace thermoform;

inline Eigen::MatrixXd diag4(double a, double b, double c, double d) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  m(3, 3) = d;
  return m;
}

// Four diagonal matrices: two copies of diag(1,2,0,0), then diag(1,0,3,0)
// and diag(1,0,0,4). Symbols are 0-based here.
inline MatrixCocycle diagonal_example() {
  return MatrixCocycle({diag4(1, 2, 0, 0), diag4(1, 2, 0, 0), diag4(1, 0, 3, 0), diag4(1, 0, 0, 4)});
}

// Closed-form count sum over length-n words of ||M_I||^q for the cocycle above:
// mixed words have norm 1, words over {0,1} norm 2^n, constant words 3^n, 4^n.
inline double diagonal_sum(std::size_t n, double q) {
  const double nd = static_cast<double>(n);
  return (std::pow(4.0, nd) - std::pow(2.0, nd) - 2.0) + std::pow(2.0, nd) * std::pow(2.0, nd * q) +
         std::pow(3.0, nd * q) + std::pow(4.0, nd * q);
}

inline MatrixCocycle positive_pair() {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 1.934, 1.115, 1.186, 0.554;
  b << 1.338, 1.515, 1.949, 1.668;
  return MatrixCocycle({a, b});
}

inline ShiftSpace golden_mean() { return ShiftSpace::subshift({{true, true}, {true, false}}); }

// Brute-force length-n words over m symbols in base-m counting order.
inline std::vector<Word> all_words(std::size_t m, std::size_t n) {
  std::vector<Word> out;
  Word w(n, 0);
  while (true) {
    out.push_back(w);
    std::size_t i = n;
    while (i > 0 && w[i - 1] + 1 == m) w[--i] = 0;
    if (i == 0) break;
    ++w[i - 1];
  }
  return out;
}

inline double binary_entropy(double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); }

}  // namespace testing
