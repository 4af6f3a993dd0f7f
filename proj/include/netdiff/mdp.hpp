#pragma once

#include "netdiff/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace netdiff {

/// Target of the quality update. MaxNext (the default): max over actions of
/// R(X_next, .), which does not depend on the action taken. Realized:
/// R(X_next, W) for the action W that was active during the transition.
/// Text forms: "max-next" (alias "paper") and "realized".
enum class RewardMode { MaxNext, Realized };

RewardMode parse_reward_mode(std::string_view text);
std::string_view to_string(RewardMode mode) noexcept;

struct MdpConfig {
  std::vector<Matrix> actions;  // candidate generators, all n x n
  Protocol protocol = Protocol::Conservative;
  Matrix reward;                // n x actions.size()
  double learning_rate = 0.2;   // mu in (0, 1]
  double discount = 0.995;      // gamma in (0, 1)
  double exploitation = 0.4;    // epsilon in [0, 1]
  std::int64_t steps = 0;
  std::uint64_t seed = 0;
  Index initial_state = 0;
  /// Defaults to a random assembly: each column (P1) or row (P2) taken from
  /// a uniformly drawn action.
  std::optional<Matrix> initial_grand;
  /// Defaults to all zeros.
  std::optional<Matrix> initial_quality;
  RewardMode reward_mode = RewardMode::MaxNext;
  std::vector<std::pair<Index, Index>> tracked;  // (state, action) pairs
  std::int64_t history_stride = 1000;

  Index states() const { return actions.empty() ? 0 : actions.front().rows(); }
};

struct LearningResult {
  Matrix quality;                     // n x w
  Matrix grand;                       // final Q_g
  std::vector<std::int64_t> visits;   // arrivals per state
  Vector occupancy_time;              // holding time per state
  Vector stationary;                  // v0 of the final Q_g
  std::vector<std::int64_t> history_steps;
  Matrix history;                     // rows follow history_steps, cols follow tracked
  std::vector<double> reward_trace;   // cumulative reward at history_steps
  double total_time = 0.0;
};

/// Throws BadConfig, AbsorbingState.
LearningResult run_qlearning(const MdpConfig& cfg);

/// Independent trials; trial k uses a seed derived from (cfg.seed, k), a
/// random initial state and a random initial grand matrix.
std::vector<LearningResult> run_qlearning_trials(const MdpConfig& cfg, Index trials, unsigned threads = 1);

/// Normalized null vector of Q_g (right for P1, left for P2). Throws
/// Reducible when the null space has dimension above one.
Vector stationary_distribution(const Matrix& q, Protocol protocol);

/// argmax (lowest index on ties) with probability epsilon, else uniform.
Index epsilon_greedy(const Eigen::Ref<const Vector>& row, double epsilon, std::mt19937_64& rng);

/// w random-complete generators of the given protocol.
std::vector<Matrix> random_complete_actions(Index n, Index w, Protocol protocol, std::uint64_t seed);

/// For every tracked pair: variance of the quality over the final window
/// (fraction of the recorded history) against its range over the whole run.
struct ConvergenceProxy {
  std::vector<double> window_variance;
  std::vector<double> range;
  bool passed = false;
};
ConvergenceProxy learning_curve_proxy(const LearningResult& r, double window = 0.1, double ratio = 0.01);

}  // namespace netdiff
