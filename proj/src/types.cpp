#include "netdiff/types.hpp"

#include "netdiff/error.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace netdiff {

std::string_view to_string(Protocol protocol) noexcept {
  return protocol == Protocol::Conservative ? "P1" : "P2";
}

Protocol parse_protocol(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "p1" || lower == "conservative") return Protocol::Conservative;
  if (lower == "p2" || lower == "nonconservative" || lower == "non-conservative")
    return Protocol::NonConservative;
  throw Error(Errc::BadConfig, "unknown protocol '" + std::string(text) + "' (expected P1 or P2)");
}

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateEdge: return "DuplicateEdge";
    case Errc::SelfLoop: return "SelfLoop";
    case Errc::BadWeight: return "BadWeight";
    case Errc::BadIndex: return "BadIndex";
    case Errc::BadParams: return "BadParams";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::Defective: return "Defective";
    case Errc::NoZeroEigenvalue: return "NoZeroEigenvalue";
    case Errc::ImaginaryResidue: return "ImaginaryResidue";
    case Errc::NotConservative: return "NotConservative";
    case Errc::NotNonConservative: return "NotNonConservative";
    case Errc::NotStronglyConnected: return "NotStronglyConnected";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::UnstableSpectrum: return "UnstableSpectrum";
    case Errc::BadHorizon: return "BadHorizon";
    case Errc::EmptyStubborn: return "EmptyStubborn";
    case Errc::AllStubborn: return "AllStubborn";
    case Errc::SingularReduced: return "SingularReduced";
    case Errc::DegenerateLeadingCoefficient: return "DegenerateLeadingCoefficient";
    case Errc::UnstableClosedLoop: return "UnstableClosedLoop";
    case Errc::Disconnected: return "Disconnected";
    case Errc::SteadyModeEdited: return "SteadyModeEdited";
    case Errc::InvalidEdit: return "InvalidEdit";
    case Errc::AbsorbingState: return "AbsorbingState";
    case Errc::Reducible: return "Reducible";
    case Errc::BadConfig: return "BadConfig";
    case Errc::UnknownCommand: return "UnknownCommand";
    case Errc::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace netdiff
