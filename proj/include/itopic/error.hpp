#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace itopic {

/// Failure categories surfaced to callers. The CLI maps these onto exit codes.
enum class ErrorKind {
  InvalidArgument,
  MalformedUtf8,
  ParseError,
  EmptyVocabulary,
  DimensionTooLarge,
  DimensionMismatch,
  MissingId,
  DuplicateId,
  UnexpectedId,
  TooFewPoints,
  InsufficientOverlap,
  UniverseMismatch,
  Io,
};

constexpr std::string_view to_string(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MalformedUtf8: return "MalformedUtf8";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MissingId: return "MissingId";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::UnexpectedId: return "UnexpectedId";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorKind::UniverseMismatch: return "UniverseMismatch";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace itopic
