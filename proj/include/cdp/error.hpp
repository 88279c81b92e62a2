#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdp {

enum class ErrorCode {
  collection_overflow,
  invalid_presentation,
  parse_error,
  completion_budget_exceeded,
  not_confluent,
  zero_length,
  target_unreachable,
  filter_exhausted,
  pool_exhausted,
  empty_data,
  pattern_too_large,
  restart_budget_exceeded,
  series_too_short,
  refusal,
  io_error,
  format_error,
  config_error,
  invalid_argument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error(ErrorCode::parse_error,
              std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace cdp
