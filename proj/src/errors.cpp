#include "spreadbound/errors.hpp"

namespace spb {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::NegativeRate: return "NegativeRate";
    case Errc::NonFiniteRate: return "NonFiniteRate";
    case Errc::DuplicateTransitionKind: return "DuplicateTransitionKind";
    case Errc::EmptyAffectorSet: return "EmptyAffectorSet";
    case Errc::UnknownCompartment: return "UnknownCompartment";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::InvalidProbability: return "InvalidProbability";
    case Errc::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case Errc::GridInvalid: return "GridInvalid";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::NonFiniteDerivative: return "NonFiniteDerivative";
    case Errc::MissingSeries: return "MissingSeries";
    case Errc::UnknownVariant: return "UnknownVariant";
    case Errc::InsufficientTrials: return "InsufficientTrials";
    case Errc::DomainError: return "DomainError";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Error";
}

std::string format_issues(const std::vector<Issue>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += errc_name(issue.code);
    out += ": ";
    out += issue.detail;
  }
  return out;
}

}  // namespace spb
