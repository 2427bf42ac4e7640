#pragma once

#include <stdexcept>
#include <string>

namespace sensq {

// Error codes used across the library. Validation errors carry the offending
// set id / unit so the CLI can point at the input line.
enum class ErrorCode {
  zero_treated,
  multi_treated,
  set_too_small,
  non_finite_outcome,
  duplicate_set_id,
  length_mismatch,
  degenerate_scale,
  index_out_of_range,
  k_out_of_range,
  not_pair_study,
  support_too_large,
  engine_mismatch,
  enumeration_too_large,
  set_too_large,
  too_many_subsets,
  invalid_config,
  parse_error,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class ValidationError : public Error {
 public:
  ValidationError(ErrorCode code, std::string message, std::string set_id = {},
                  int unit = -1)
      : Error(code, std::move(message)), set_id_(std::move(set_id)), unit_(unit) {}

  const std::string& set_id() const { return set_id_; }
  int unit() const { return unit_; }

 private:
  std::string set_id_;
  int unit_;
};

}  // namespace sensq
