#include "adaptrv/error.hpp"

namespace adaptrv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::SyntaxError: return "SyntaxError";
  case ErrorCode::UnknownPattern: return "UnknownPattern";
  case ErrorCode::InvalidPattern: return "InvalidPattern";
  case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
  case ErrorCode::TemplateValidationError: return "TemplateValidationError";
  case ErrorCode::TimeRegression: return "TimeRegression";
  case ErrorCode::NondeterminismDetected: return "NondeterminismDetected";
  case ErrorCode::NoTimeBound: return "NoTimeBound";
  case ErrorCode::UnknownEvent: return "UnknownEvent";
  case ErrorCode::NameCollision: return "NameCollision";
  case ErrorCode::WrongPattern: return "WrongPattern";
  case ErrorCode::BadIndex: return "BadIndex";
  case ErrorCode::UnsupportedFormula: return "UnsupportedFormula";
  case ErrorCode::GenerationFailure: return "GenerationFailure";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::BadCommand: return "BadCommand";
  case ErrorCode::UnknownSession: return "UnknownSession";
  case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string syntax_message(std::size_t position,
                           const std::vector<std::string> &expected,
                           const std::string &found) {
  std::string msg = "at position " + std::to_string(position) + ": expected ";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i > 0)
      msg += i + 1 == expected.size() ? " or " : ", ";
    msg += expected[i];
  }
  msg += ", found " + (found.empty() ? std::string("end of input")
                                     : "'" + found + "'");
  return msg;
}

} // namespace

SyntaxError::SyntaxError(std::size_t position,
                         std::vector<std::string> expected,
                         const std::string &found)
    : Error(ErrorCode::SyntaxError, syntax_message(position, expected, found)),
      position_(position), expected_(std::move(expected)) {}

} // namespace adaptrv
