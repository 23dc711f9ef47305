#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpnls {

enum class ErrorKind {
  InvalidParams,
  Domain,
  BracketFailure,
  StiffnessFailure,
  DivergentNorm,
  NoRoot,
  HypothesisViolated,
  WindowNotFound,
  GridTooSmall,
  NonFinite,
  InsufficientSamples,
};

std::string_view to_string(ErrorKind kind);

/// True for errors caused by bad inputs rather than numerical breakdown.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dpnls
