#include "dpnls/error.hpp"

namespace dpnls {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::StiffnessFailure: return "StiffnessFailure";
    case ErrorKind::DivergentNorm: return "DivergentNorm";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::WindowNotFound: return "WindowNotFound";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
  }
  return "Unknown";
}

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParams:
    case ErrorKind::Domain:
    case ErrorKind::HypothesisViolated:
    case ErrorKind::GridTooSmall:
    case ErrorKind::InsufficientSamples:
      return true;
    default:
      return false;
  }
}

}  // namespace dpnls
