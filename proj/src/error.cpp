#include "ifp/error.hpp"

namespace ifp {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::UndefinedMoment: return "UndefinedMoment";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::RootBracketFailure: return "RootBracketFailure";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::AssumptionViolated: return "AssumptionViolated";
    case ErrorKind::DominanceUnverifiable: return "DominanceUnverifiable";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::DegenerateAlpha: return "DegenerateAlpha";
    case ErrorKind::InsufficientTail: return "InsufficientTail";
    case ErrorKind::UnknownParameter: return "UnknownParameter";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::MissingFile: return "MissingFile";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<double> partial)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      detail_(message),
      partial_(partial) {}

}  // namespace ifp
