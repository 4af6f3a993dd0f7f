#pragma once

#include "netdiff/graph.hpp"
#include "netdiff/trajectory.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace netdiff {

struct SimulationScheme {
  enum class Kind { ExactEvent, Discretized };
  Kind kind = Kind::ExactEvent;
  Index substeps = 1;  // per unit time, Discretized only

  static SimulationScheme exact() { return {}; }
  static SimulationScheme discretized(Index substeps);
  /// "exact" or "disc:K".
  static SimulationScheme parse(std::string_view text);
  std::string to_string() const;
};

struct SampleOptions {
  Index trials = 1000;
  std::uint64_t seed = 0;
  SimulationScheme scheme;
  bool keep_trials = true;
  unsigned threads = 1;  // 0 = hardware concurrency
  bool strict_discretization = false;
};

struct TrajectoryEnsemble {
  std::vector<Trajectory> trials;  // empty unless keep_trials
  Trajectory mean;
  Matrix standard_error;  // same shape as mean.values
  std::uint64_t seed = 0;
  SimulationScheme scheme;
  Index n_trials = 0;
  std::vector<std::string> warnings;
};

/// Applies one activation of edge e to the state.
/// P1: S_from += C S_to and S_to -= C S_to. P2: S_from = C S_to + (1 - C) S_from.
void apply_update(Protocol protocol, const Edge& e, Vector& state);

/// Independent stream for one trial, derived from (seed, trial).
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial);

/// Called after every edge activation with the state before and after.
using EventObserver =
    std::function<void(double time, const Edge& edge, const Vector& before, const Vector& after)>;

/// One sample path sampled onto `grid`; the state is piecewise constant
/// between activations.
Trajectory simulate_path(const WeightedDigraph& g, Protocol protocol, const Vector& s0, double horizon,
                         const std::vector<double>& grid, const SimulationScheme& scheme, std::mt19937_64& rng,
                         const EventObserver& observer = {});

/// Throws BadHorizon, DimensionMismatch, BadParams (strict discretization).
TrajectoryEnsemble sample_paths(const WeightedDigraph& g, Protocol protocol, const Vector& s0, double horizon,
                                const std::vector<double>& grid, const SampleOptions& options);

/// Per-element average of the stored trials.
Trajectory ensemble_mean(const TrajectoryEnsemble& ensemble);

}  // namespace netdiff
