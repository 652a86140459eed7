#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spb {

enum class Errc {
  NegativeRate,
  NonFiniteRate,
  DuplicateTransitionKind,
  EmptyAffectorSet,
  UnknownCompartment,
  UnknownNode,
  InvalidProbability,
  StateSpaceTooLarge,
  GridInvalid,
  GridMismatch,
  NonFiniteDerivative,
  MissingSeries,
  UnknownVariant,
  InsufficientTrials,
  DomainError,
  IoError,
  ConfigError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// One validation finding; validate() collects these instead of throwing.
struct Issue {
  Errc code;
  std::string detail;
};

std::string format_issues(const std::vector<Issue>& issues);

}  // namespace spb
