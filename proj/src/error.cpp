#include "pairclust/error.hpp"

namespace pairclust {

std::string_view to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_rate: return "invalid-rate";
    case ErrorCode::out_of_support: return "out-of-support";
    case ErrorCode::numerical_underflow: return "numerical-underflow";
    case ErrorCode::no_informative_eigenvalue: return "no-informative-eigenvalue";
    case ErrorCode::weight_saturation: return "weight-saturation";
    case ErrorCode::solver_failure: return "solver-failure";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::size_limit: return "size-limit";
    case ErrorCode::enumeration_bound: return "enumeration-bound";
    case ErrorCode::insufficient_training_data: return "insufficient-training-data";
    case ErrorCode::non_finite: return "non-finite";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::configuration: return "configuration";
  }
  return "unknown";
}

} // namespace pairclust
