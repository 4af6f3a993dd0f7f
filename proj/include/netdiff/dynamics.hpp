#pragma once

#include "netdiff/graph.hpp"
#include "netdiff/spectral.hpp"
#include "netdiff/trajectory.hpp"

#include <vector>

namespace netdiff {

enum class Route { Auto, Spectral, Exponential };

/// S(t) = exp(Q t) S0 at each sample time. Auto uses the eigendecomposition
/// when it is well conditioned and falls back to the matrix exponential;
/// Spectral propagates Defective.
Trajectory expected_trajectory(const Matrix& q, const Vector& s0, const std::vector<double>& times,
                               Route route = Route::Auto);
Trajectory expected_trajectory(const TransitionRateMatrix& q, const Vector& s0,
                               const std::vector<double>& times, Route route = Route::Auto);

/// c_s v_Rs with c_s = sum(S0) / Psi.
/// Throws NotConservative, NotStronglyConnected, NoZeroEigenvalue.
Vector stationary_value_conservative(const TransitionRateMatrix& q, const Vector& s0);

/// c_v = v_Ls . S0 / Omega. Throws NotNonConservative, NotStronglyConnected.
double consensus_value(const TransitionRateMatrix& q, const Vector& s0);

struct SwitchingSegment {
  Matrix rates;
  double start = 0.0;
};

struct SwitchingSchedule {
  std::vector<SwitchingSegment> segments;
  double horizon = 0.0;
};

/// Periodic schedule alternating through `matrices`, switching every `period`.
SwitchingSchedule alternating_schedule(const std::vector<Matrix>& matrices, double period, double horizon);

/// Piecewise-constant propagation; throws DimensionMismatch or BadHorizon.
Trajectory simulate_switching(const SwitchingSchedule& schedule, const Vector& s0,
                              const std::vector<double>& times);

/// Compares the right null spaces (the steady eigenvector v_Rs). Under P2 this
/// is always the all-ones direction. Throws RankDeficient.
bool shares_steady_eigenvector(const Matrix& q1, const Matrix& q2, Protocol protocol, double tol = 1e-9);

struct ConvergenceBound {
  double q_max = 0.0;
  double initial_norm = 0.0;

  /// ||delta(0)||_2 exp(q_max t)
  double operator()(double t) const;
};

/// q_max is the real part of the non-steady eigenvalue closest to the
/// imaginary axis. Throws UnstableSpectrum if Q lacks a simple zero
/// eigenvalue or has another eigenvalue with nonnegative real part.
ConvergenceBound convergence_bound(const Matrix& q, const Vector& delta0);

}  // namespace netdiff
