#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace ifp {

enum class ErrorKind {
  InvalidParameter,
  NotIrreducible,
  NoConvergence,
  Overflow,
  UndefinedMoment,
  DomainError,
  RootBracketFailure,
  GridMismatch,
  AssumptionViolated,
  DominanceUnverifiable,
  DegenerateVariance,
  DegenerateAlpha,
  InsufficientTail,
  UnknownParameter,
  SchemaViolation,
  MissingFile,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<double> partial = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

  // Best estimate available when the failure happened (NoConvergence).
  std::optional<double> partial() const noexcept { return partial_; }

 private:
  ErrorKind kind_;
  std::string detail_;
  std::optional<double> partial_;
};

}  // namespace ifp
