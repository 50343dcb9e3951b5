#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adaptrv {

enum class ErrorCode {
  SyntaxError,
  UnknownPattern,
  InvalidPattern,
  UnsupportedCombination,
  TemplateValidationError,
  TimeRegression,
  NondeterminismDetected,
  NoTimeBound,
  UnknownEvent,
  NameCollision,
  WrongPattern,
  BadIndex,
  UnsupportedFormula,
  GenerationFailure,
  ParseError,
  BadCommand,
  UnknownSession,
  IoError,
};

/// Stable machine-readable name, e.g. "UnsupportedCombination".
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Raised by the requirement and MTL parsers.
class SyntaxError : public Error {
public:
  SyntaxError(std::size_t position, std::vector<std::string> expected,
              const std::string &found);

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string> &expected() const noexcept {
    return expected_;
  }

private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

/// Trace file parse failure; carries the 1-based line number.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string &message)
      : Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace adaptrv
