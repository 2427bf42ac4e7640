#pragma once

#include <cmath>
#include <limits>

#include "sensq/error.hpp"

namespace sensq {

// A hidden-bias bound: a finite value in [1, inf) or the distinguished
// unbounded value. Unbounded entries model sets whose bias is unconstrained.
class ExtendedBias {
 public:
  ExtendedBias() : gamma_(1.0) {}

  explicit ExtendedBias(double gamma) : gamma_(gamma) {
    if (!(gamma >= 1.0) || std::isnan(gamma)) {
      throw Error(ErrorCode::invalid_config, "hidden-bias bound must be >= 1");
    }
  }

  static ExtendedBias unbounded() {
    ExtendedBias b;
    b.gamma_ = std::numeric_limits<double>::infinity();
    return b;
  }

  bool is_unbounded() const { return std::isinf(gamma_); }

  // Finite value; +inf when unbounded.
  double value() const { return gamma_; }

  double log_value() const { return std::log(gamma_); }

  friend bool operator==(const ExtendedBias& a, const ExtendedBias& b) {
    return a.gamma_ == b.gamma_;
  }

 private:
  double gamma_;
};

}  // namespace sensq
