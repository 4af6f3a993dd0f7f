#pragma once

#include "netdiff/graph.hpp"
#include "netdiff/spectral.hpp"
#include "netdiff/trajectory.hpp"

#include <optional>
#include <span>
#include <vector>

namespace netdiff {

/// s~ = A^-1 x.
CVector to_quasi(const SpectralDecomposition& d, const Vector& x);
CVector to_quasi(const SpectralDecomposition& d, const CVector& x);
/// x = A s~ (complex; see real_part_checked).
CVector from_quasi(const SpectralDecomposition& d, const CVector& quasi);

/// Feedback block F acting on one quasi-mode: F = K (Proportional) or
/// F = K / s (Integral).
struct ControllerSpec {
  enum class Kind { None, Proportional, Integral };
  Index mode = 0;
  Kind kind = Kind::None;
  double gain = 0.0;

  static ControllerSpec none() { return {}; }
  static ControllerSpec proportional(Index mode, double k) { return {mode, Kind::Proportional, k}; }
  static ControllerSpec integral(Index mode, double k) { return {mode, Kind::Integral, k}; }
};

/// Closed-loop poles of the controlled quasi-mode.
CVector closed_loop_poles(Complex q_y, const ControllerSpec& ctrl);

struct ModalResponse {
  Trajectory nodes;
  CMatrix quasi;  // row k = s~(times[k])
  bool marginal = false;
};

/// Impulse response with the given controllers. The impulse enters as a jump
/// in the quasi-state; controlled modes run their closed loop on the
/// input-driven part, the response to s0 stays open-loop. Throws
/// UnstableClosedLoop, BadParams (complex or repeated target mode).
ModalResponse controlled_response(const SpectralDecomposition& d, const Vector& impulse,
                                  std::span<const ControllerSpec> controllers, const std::vector<double>& times,
                                  const std::optional<Vector>& s0 = std::nullopt);
ModalResponse controlled_response(const SpectralDecomposition& d, const Vector& impulse, const ControllerSpec& ctrl,
                                  const std::vector<double>& times,
                                  const std::optional<Vector>& s0 = std::nullopt);

/// Which quasi-inputs pass through G(s) = (s - q_y) / (s - q_y + F).
/// TargetMode: only mode y; the open-loop result then coincides with the
/// feedback loop on every mode. AllModes: every mode sees the filtered input,
/// as when all modes share one physical input channel.
enum class SubsumptionScope { TargetMode, AllModes };

/// Open-loop quasi-input u~'(t) = D u~ delta(t) + C_f exp(A_f t) B_f u~.
struct SubsumedQuasiInput {
  struct Filter {
    Matrix a;  // A_f
    Vector b;  // B_f
    Vector c;  // C_f (row)
  };
  CVector impulse;                          // u~, the direct (D = 1) part
  std::vector<std::optional<Filter>> filters;  // per mode, empty = pass-through
  SubsumptionScope scope = SubsumptionScope::TargetMode;

  /// Smooth part of u~'(t) for every mode.
  CVector smooth_part(double t) const;
};

SubsumedQuasiInput subsumed_quasi_input(const SpectralDecomposition& d, const CVector& quasi_impulse,
                                        std::span<const ControllerSpec> controllers,
                                        SubsumptionScope scope = SubsumptionScope::TargetMode);

/// Node-space input A u~'(t) (smooth part) that realizes the subsumed design
/// open-loop.
Vector subsumed_node_input(const SpectralDecomposition& d, const SubsumedQuasiInput& u, double t);

/// Open-loop simulation of the modes driven by the subsumed quasi-input.
ModalResponse simulate_subsumed(const SpectralDecomposition& d, const SubsumedQuasiInput& u,
                                const std::vector<double>& times, const std::optional<Vector>& s0 = std::nullopt);

struct FiedlerAnalysis {
  Vector vector;  // unit, largest-magnitude entry positive
  double eigenvalue = 0.0;
  bool degenerate = false;
  double variance = 0.0;  // population variance; 1/n for any unit vector orthogonal to 1
  double stddev = 0.0;
  double range = 0.0;
  double iqr = 0.0;
  std::vector<double> bin_edges;
  std::vector<Index> histogram;
};

/// Fiedler vector of the Laplacian of the symmetrized adjacency (A + A^T)/2.
/// Throws Disconnected.
FiedlerAnalysis fiedler_analysis(const WeightedDigraph& g, Index bins = 20);

}  // namespace netdiff
