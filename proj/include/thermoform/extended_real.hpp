#pragma once

#include <cmath>
#include <limits>
#include <ostream>

#include "thermoform/errors.hpp"

namespace thermoform {

/// A real number or minus infinity. log(0) = -inf is a legitimate value of
/// log phi on words whose matrix product vanishes, so it is carried as an
/// explicit state rather than a floating-point sentinel.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : value_(v) {}  // NOLINT: implicit from finite reals

  static constexpr ExtReal neg_infinity() {
    ExtReal r;
    r.neg_inf_ = true;
    return r;
  }

  /// log(x) for x >= 0, with log(0) mapped to the -inf state.
  static ExtReal log_of(double x) {
    if (x < 0.0 || std::isnan(x)) throw DomainError("log of a negative number");
    if (x == 0.0) return neg_infinity();
    return ExtReal(std::log(x));
  }

  constexpr bool is_finite() const { return !neg_inf_; }
  constexpr bool is_neg_infinity() const { return neg_inf_; }

  double value() const {
    if (neg_inf_) throw DomainError("value() on -inf");
    return value_;
  }

  /// Finite value, or -HUGE_VAL for the -inf state (for comparisons/printing).
  constexpr double as_double() const {
    return neg_inf_ ? -std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.neg_inf_ || b.neg_inf_) return neg_infinity();
    return ExtReal(a.value_ + b.value_);
  }

  /// Scaling rules: c > 0 keeps -inf, c == 0 maps -inf to 0, c < 0 on -inf
  /// is ill-posed and throws.
  friend ExtReal scale(double c, ExtReal a) {
    if (!a.neg_inf_) return ExtReal(c * a.value_);
    if (c > 0.0) return neg_infinity();
    if (c == 0.0) return ExtReal(0.0);
    throw DomainError("negative coefficient applied to a -inf potential value");
  }

  friend constexpr bool operator==(ExtReal a, ExtReal b) {
    if (a.neg_inf_ || b.neg_inf_) return a.neg_inf_ == b.neg_inf_;
    return a.value_ == b.value_;
  }
  friend constexpr bool operator<(ExtReal a, ExtReal b) {
    if (b.neg_inf_) return false;
    if (a.neg_inf_) return true;
    return a.value_ < b.value_;
  }
  friend constexpr bool operator<=(ExtReal a, ExtReal b) { return !(b < a); }

  friend std::ostream& operator<<(std::ostream& os, ExtReal a) {
    if (a.neg_inf_) return os << "-inf";
    return os << a.value_;
  }

 private:
  double value_ = 0.0;
  bool neg_inf_ = false;
};

}  // namespace thermoform
