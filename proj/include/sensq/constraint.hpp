#pragma once

#include <variant>
#include <vector>

#include "sensq/bias.hpp"

namespace sensq {

// Per-set bounds Gamma_i on the hidden biases.
struct VectorBound {
  std::vector<ExtendedBias> gamma;
};

// Bound on the k-th smallest hidden bias: Gamma*_(k) <= gamma0.
struct QuantileBound {
  int k = 1;
  ExtendedBias gamma0;
};

using SensitivityConstraint = std::variant<VectorBound, QuantileBound>;

}  // namespace sensq
