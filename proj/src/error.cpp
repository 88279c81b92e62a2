#include "cdp/error.hpp"

namespace cdp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::collection_overflow: return "COLLECTION_OVERFLOW";
    case ErrorCode::invalid_presentation: return "INVALID_PRESENTATION";
    case ErrorCode::parse_error: return "PARSE_ERROR";
    case ErrorCode::completion_budget_exceeded: return "COMPLETION_BUDGET_EXCEEDED";
    case ErrorCode::not_confluent: return "NOT_CONFLUENT";
    case ErrorCode::zero_length: return "ZERO_LENGTH";
    case ErrorCode::target_unreachable: return "TARGET_UNREACHABLE";
    case ErrorCode::filter_exhausted: return "FILTER_EXHAUSTED";
    case ErrorCode::pool_exhausted: return "POOL_EXHAUSTED";
    case ErrorCode::empty_data: return "EMPTY_DATA";
    case ErrorCode::pattern_too_large: return "PATTERN_TOO_LARGE";
    case ErrorCode::restart_budget_exceeded: return "RESTART_BUDGET_EXCEEDED";
    case ErrorCode::series_too_short: return "SERIES_TOO_SHORT";
    case ErrorCode::refusal: return "REFUSAL";
    case ErrorCode::io_error: return "IO_ERROR";
    case ErrorCode::format_error: return "FORMAT_ERROR";
    case ErrorCode::config_error: return "CONFIG_ERROR";
    case ErrorCode::invalid_argument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

}  // namespace cdp
