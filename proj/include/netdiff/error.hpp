#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netdiff {

enum class Errc {
  DuplicateEdge,
  SelfLoop,
  BadWeight,
  BadIndex,
  BadParams,
  DimensionMismatch,
  Defective,
  NoZeroEigenvalue,
  ImaginaryResidue,
  NotConservative,
  NotNonConservative,
  NotStronglyConnected,
  RankDeficient,
  UnstableSpectrum,
  BadHorizon,
  EmptyStubborn,
  AllStubborn,
  SingularReduced,
  DegenerateLeadingCoefficient,
  UnstableClosedLoop,
  Disconnected,
  SteadyModeEdited,
  InvalidEdit,
  AbsorbingState,
  Reducible,
  BadConfig,
  UnknownCommand,
  IoFailure,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the toolkit carries one of the codes above so that
/// callers (and the CLI) can report structured errors.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace netdiff
