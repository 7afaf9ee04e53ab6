#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pairclust {

enum class ErrorCode
{
  invalid_argument,
  invalid_rate,
  out_of_support,
  numerical_underflow,
  no_informative_eigenvalue,
  weight_saturation,
  solver_failure,
  dimension_mismatch,
  size_limit,
  enumeration_bound,
  insufficient_training_data,
  non_finite,
  parse_error,
  io_error,
  configuration,
};

//! Stable lowercase tag used in CSV outputs, e.g. "no-informative-eigenvalue".
std::string_view to_string(ErrorCode code);

//! Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what)
    , code_(code)
  {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace pairclust
