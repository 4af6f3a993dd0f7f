#include "netdiff/mdp.hpp"

#include "netdiff/error.hpp"
#include "netdiff/graph.hpp"
#include "netdiff/monte_carlo.hpp"
#include "netdiff/spectral.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace netdiff {
namespace {

void validate(const MdpConfig& c) {
  if (c.actions.empty()) throw Error(Errc::BadConfig, "action set is empty");
  const Index n = c.states();
  if (n < 2) throw Error(Errc::BadConfig, "at least two states are required");
  for (std::size_t a = 0; a < c.actions.size(); ++a) {
    const Matrix& q = c.actions[a];
    if (q.rows() != n || q.cols() != n)
      throw Error(Errc::BadConfig, "action " + std::to_string(a + 1) + " has the wrong shape");
    double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
    auto rep = is_ctmc_generator(q, c.protocol, 1e-9 * scale);
    if (!rep.valid)
      throw Error(Errc::BadConfig, "action " + std::to_string(a + 1) + " is not a generator: " + rep.violations.front());
  }
  if (c.reward.rows() != n || c.reward.cols() != static_cast<Index>(c.actions.size()))
    throw Error(Errc::BadConfig, "reward table must be states x actions");
  if (!(c.learning_rate > 0.0 && c.learning_rate <= 1.0)) throw Error(Errc::BadConfig, "mu must lie in (0, 1]");
  if (!(c.discount > 0.0 && c.discount < 1.0)) throw Error(Errc::BadConfig, "gamma must lie in (0, 1)");
  if (!(c.exploitation >= 0.0 && c.exploitation <= 1.0)) throw Error(Errc::BadConfig, "epsilon must lie in [0, 1]");
  if (c.steps < 0) throw Error(Errc::BadConfig, "step budget must be nonnegative");
  if (c.initial_state < 0 || c.initial_state >= n) throw Error(Errc::BadConfig, "initial state out of range");
  if (c.history_stride < 1) throw Error(Errc::BadConfig, "history stride must be positive");
  for (const auto& [s, a] : c.tracked)
    if (s < 0 || s >= n || a < 0 || a >= static_cast<Index>(c.actions.size()))
      throw Error(Errc::BadConfig, "tracked pair out of range");
  if (c.initial_grand) {
    if (c.initial_grand->rows() != n || c.initial_grand->cols() != n)
      throw Error(Errc::BadConfig, "initial grand matrix has the wrong shape");
    if (!is_ctmc_generator(*c.initial_grand, c.protocol, 1e-9 * std::max(1.0, c.initial_grand->cwiseAbs().maxCoeff())))
      throw Error(Errc::BadConfig, "initial grand matrix is not a generator");
  }
  if (c.initial_quality && (c.initial_quality->rows() != n || c.initial_quality->cols() != c.reward.cols()))
    throw Error(Errc::BadConfig, "initial quality table must be states x actions");
}

void adopt(Matrix& grand, const Matrix& action, Index state, Protocol p) {
  if (p == Protocol::Conservative)
    grand.col(state) = action.col(state);
  else
    grand.row(state) = action.row(state);
}

}  // namespace

RewardMode parse_reward_mode(std::string_view text) {
  if (text == "max-next" || text == "paper") return RewardMode::MaxNext;
  if (text == "realized") return RewardMode::Realized;
  throw Error(Errc::BadConfig, "reward mode must be 'max-next' or 'realized'");
}

std::string_view to_string(RewardMode mode) noexcept { return mode == RewardMode::MaxNext ? "max-next" : "realized"; }

Index epsilon_greedy(const Eigen::Ref<const Vector>& row, double epsilon, std::mt19937_64& rng) {
  if (row.size() == 0) throw Error(Errc::BadParams, "quality row is empty");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    Index best = 0;
    for (Index k = 1; k < row.size(); ++k)
      if (row(k) > row(best)) best = k;
    return best;
  }
  std::uniform_int_distribution<Index> pick(0, row.size() - 1);
  return pick(rng);
}

LearningResult run_qlearning(const MdpConfig& cfg) {
  validate(cfg);
  const Index n = cfg.states();
  const auto w = static_cast<Index>(cfg.actions.size());
  const bool columns = cfg.protocol == Protocol::Conservative;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<Index> any_action(0, w - 1);

  LearningResult r;
  r.quality = cfg.initial_quality ? *cfg.initial_quality : Matrix::Zero(n, w);
  r.visits.assign(static_cast<std::size_t>(n), 0);
  r.occupancy_time = Vector::Zero(n);
  if (cfg.initial_grand) {
    r.grand = *cfg.initial_grand;
  } else {
    r.grand = Matrix::Zero(n, n);
    for (Index s = 0; s < n; ++s) adopt(r.grand, cfg.actions[static_cast<std::size_t>(any_action(rng))], s, cfg.protocol);
  }
  const Vector best_reward = cfg.reward.rowwise().maxCoeff();
  const double scale = [&] {
    double s = 1.0;
    for (const auto& a : cfg.actions) s = std::max(s, a.cwiseAbs().maxCoeff());
    return s;
  }();

  Index x = cfg.initial_state;
  // The first decision precedes any transition. From a zero quality row this
  // is a uniform draw; a supplied table is consulted epsilon-greedily.
  Index active = cfg.initial_quality ? epsilon_greedy(r.quality.row(x).transpose(), cfg.exploitation, rng)
                                     : any_action(rng);
  adopt(r.grand, cfg.actions[static_cast<std::size_t>(active)], x, cfg.protocol);

  Vector rates(n);
  double cumulative = 0.0;
  auto record = [&](std::int64_t step) {
    r.history_steps.push_back(step);
    r.reward_trace.push_back(cumulative);
    Index row = static_cast<Index>(r.history_steps.size()) - 1;
    for (std::size_t k = 0; k < cfg.tracked.size(); ++k)
      r.history(row, static_cast<Index>(k)) = r.quality(cfg.tracked[k].first, cfg.tracked[k].second);
  };
  r.history.resize(static_cast<Index>(cfg.steps / cfg.history_stride) + 2, static_cast<Index>(cfg.tracked.size()));
  record(0);

  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    rates = columns ? Vector(r.grand.col(x)) : Vector(r.grand.row(x).transpose());
    rates(x) = 0.0;
    const double total = rates.sum();
    if (!(total > 0.0))
      throw Error(Errc::AbsorbingState, "state " + std::to_string(x + 1) + " has no outgoing rate at step " +
                                            std::to_string(step));
    r.occupancy_time(x) += std::exponential_distribution<double>(total)(rng);
    std::discrete_distribution<Index> jump(rates.data(), rates.data() + n);
    const Index next = jump(rng);
    ++r.visits[static_cast<std::size_t>(next)];

    const double reward = cfg.reward_mode == RewardMode::MaxNext ? best_reward(next) : cfg.reward(next, active);
    cumulative += reward;
    double& v = r.quality(x, active);
    v = (1.0 - cfg.learning_rate) * v + cfg.learning_rate * (reward + cfg.discount * r.quality.row(next).maxCoeff());

    x = next;
    active = epsilon_greedy(r.quality.row(x).transpose(), cfg.exploitation, rng);
    adopt(r.grand, cfg.actions[static_cast<std::size_t>(active)], x, cfg.protocol);

    if (step % 10000 == 0) {
      auto rep = is_ctmc_generator(r.grand, cfg.protocol, 1e-9 * scale);
      if (!rep.valid) throw Error(Errc::BadConfig, "grand matrix lost generator structure: " + rep.violations.front());
    }
    if (step % cfg.history_stride == 0 || step == cfg.steps) record(step);
  }
  r.history.conservativeResize(static_cast<Index>(r.history_steps.size()), r.history.cols());
  r.total_time = r.occupancy_time.sum();
  r.stationary = stationary_distribution(r.grand, cfg.protocol);
  return r;
}

std::vector<LearningResult> run_qlearning_trials(const MdpConfig& cfg, Index trials, unsigned threads) {
  if (trials < 1) throw Error(Errc::BadConfig, "at least one trial is required");
  std::vector<MdpConfig> configs(static_cast<std::size_t>(trials), cfg);
  for (Index k = 0; k < trials; ++k) {
    auto rng = trial_rng(cfg.seed, static_cast<std::uint64_t>(k));
    auto& c = configs[static_cast<std::size_t>(k)];
    c.seed = rng();
    c.initial_state = std::uniform_int_distribution<Index>(0, cfg.states() - 1)(rng);
    c.initial_grand.reset();
  }
  std::vector<LearningResult> out(static_cast<std::size_t>(trials));
  threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  threads = static_cast<unsigned>(std::min<Index>(threads, trials));
  auto run = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < out.size(); k += stride) out[k] = run_qlearning(configs[k]);
  };
  if (threads <= 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run, t, threads);
    for (auto& th : pool) th.join();
  }
  return out;
}

Vector stationary_distribution(const Matrix& q, Protocol protocol) {
  if (q.rows() != q.cols()) throw Error(Errc::DimensionMismatch, "matrix must be square");
  Matrix m = protocol == Protocol::Conservative ? q : Matrix(q.transpose());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const Index n = s.size();
  const double tol = 1e-10 * std::max(s(0), 1e-300);
  if (s(n - 1) > tol) throw Error(Errc::NoZeroEigenvalue, "matrix has no null vector");
  if (n >= 2 && s(n - 2) <= tol) throw Error(Errc::Reducible, "null space has dimension above one");
  Vector v = svd.matrixV().col(n - 1);
  v /= v.sum();
  v = v.cwiseMax(0.0);
  return v / v.sum();
}

std::vector<Matrix> random_complete_actions(Index n, Index w, Protocol protocol, std::uint64_t seed) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(w));
  for (Index k = 0; k < w; ++k) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(k));
    auto g = generate_random_graph(RandomModel::RandomComplete, {n}, rng());
    out.push_back(transition_rate_matrix(g, protocol).rates);
  }
  return out;
}

ConvergenceProxy learning_curve_proxy(const LearningResult& r, double window, double ratio) {
  ConvergenceProxy p;
  const Index rows = r.history.rows();
  if (rows < 2 || r.history.cols() == 0) return p;
  const std::int64_t last = r.history_steps.back();
  const auto cutoff = static_cast<std::int64_t>(std::floor(static_cast<double>(last) * (1.0 - window)));
  Index first = 0;
  while (first < rows && r.history_steps[static_cast<std::size_t>(first)] < cutoff) ++first;
  p.passed = true;
  for (Index c = 0; c < r.history.cols(); ++c) {
    auto col = r.history.col(c);
    auto tail = col.segment(first, rows - first);
    double mean = tail.mean();
    double var = (tail.array() - mean).square().mean();
    double range = col.maxCoeff() - col.minCoeff();
    p.window_variance.push_back(var);
    p.range.push_back(range);
    if (!(var < ratio * range)) p.passed = false;
  }
  return p;
}

}  // namespace netdiff
