#pragma once

#include "netdiff/types.hpp"

#include <optional>
#include <vector>

namespace netdiff {

enum class TrajectorySource { Analytic, EnsembleMean, Inhomogeneous };

/// Node values sampled on a time grid; row k of `values` is S(times[k]).
struct Trajectory {
  std::vector<double> times;
  Matrix values;
  std::optional<Protocol> protocol;
  TrajectorySource source = TrajectorySource::Analytic;

  Index samples() const noexcept { return values.rows(); }
  Index nodes() const noexcept { return values.cols(); }
  Vector at(Index k) const { return values.row(k).transpose(); }
  Vector final_state() const { return at(samples() - 1); }
};

/// Throws Error{BadHorizon} unless times are finite, nonnegative and strictly
/// ascending.
void validate_times(const std::vector<double>& times);

/// horizon * k / intervals for k = 0..intervals.
std::vector<double> time_grid(double horizon, Index intervals);

}  // namespace netdiff
