#include "netdiff/monte_carlo.hpp"

#include "netdiff/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>
#include <thread>
#include <tuple>

namespace netdiff {
namespace {

void check_inputs(const WeightedDigraph& g, const Vector& s0, double horizon, const std::vector<double>& grid) {
  if (s0.size() != g.size())
    throw Error(Errc::DimensionMismatch, "initial state has length " + std::to_string(s0.size()) +
                                             ", expected " + std::to_string(g.size()));
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(Errc::BadHorizon, "horizon must be positive");
  validate_times(grid);
  if (grid.back() > horizon) throw Error(Errc::BadHorizon, "grid extends past the horizon");
}

// Writes the current state into every grid row with time < until.
void fill_until(const std::vector<double>& grid, std::size_t& next, double until, const Vector& s, Matrix& out) {
  while (next < grid.size() && grid[next] < until) out.row(static_cast<Index>(next++)) = s.transpose();
}

}  // namespace

SimulationScheme SimulationScheme::discretized(Index substeps) {
  if (substeps < 1) throw Error(Errc::BadParams, "discretized scheme needs at least one substep per unit time");
  return {Kind::Discretized, substeps};
}

SimulationScheme SimulationScheme::parse(std::string_view text) {
  if (text == "exact") return exact();
  if (text.substr(0, 5) == "disc:") {
    long long k = 0;
    auto body = text.substr(5);
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), k);
    if (ec == std::errc() && ptr == body.data() + body.size()) return discretized(k);
  }
  throw Error(Errc::BadConfig, "scheme must be 'exact' or 'disc:K', got '" + std::string(text) + "'");
}

std::string SimulationScheme::to_string() const {
  return kind == Kind::ExactEvent ? "exact" : "disc:" + std::to_string(substeps);
}

void apply_update(Protocol protocol, const Edge& e, Vector& s) {
  if (protocol == Protocol::Conservative) {
    const double transfer = e.confidence * s(e.to);
    s(e.from) += transfer;
    s(e.to) -= transfer;
  } else {
    s(e.from) = e.confidence * s(e.to) + (1.0 - e.confidence) * s(e.from);
  }
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

Trajectory simulate_path(const WeightedDigraph& g, Protocol protocol, const Vector& s0, double horizon,
                         const std::vector<double>& grid, const SimulationScheme& scheme, std::mt19937_64& rng,
                         const EventObserver& observer) {
  check_inputs(g, s0, horizon, grid);
  Trajectory out;
  out.times = grid;
  out.protocol = protocol;
  out.values.resize(static_cast<Index>(grid.size()), g.size());
  const auto& edges = g.edges();
  Vector s = s0, before;
  std::size_t next = 0;

  auto fire = [&](double t, const Edge& e) {
    if (observer) before = s;
    apply_update(protocol, e, s);
    if (observer) observer(t, e, before, s);
  };

  if (!edges.empty() && scheme.kind == SimulationScheme::Kind::ExactEvent) {
    std::vector<double> rates;
    rates.reserve(edges.size());
    double total = 0.0;
    for (const auto& e : edges) rates.push_back(e.rate), total += e.rate;
    std::exponential_distribution<double> wait(total);
    std::discrete_distribution<std::size_t> winner(rates.begin(), rates.end());
    double t = 0.0;
    for (;;) {
      t += wait(rng);
      if (t > horizon) break;
      fill_until(grid, next, t, s, out.values);
      fire(t, edges[winner(rng)]);
    }
  } else if (!edges.empty()) {
    // Each edge fires in a substep with probability r*dt independently; the
    // gap between firings of one edge is geometric, so only firings are drawn.
    // Simultaneous firings within a substep apply in edge order.
    const double dt = 1.0 / static_cast<double>(scheme.substeps);
    const auto last = static_cast<std::int64_t>(std::floor(horizon * static_cast<double>(scheme.substeps) + 1e-9));
    std::vector<std::geometric_distribution<std::int64_t>> gap;
    gap.reserve(edges.size());
    using Slot = std::pair<std::int64_t, std::size_t>;
    std::priority_queue<Slot, std::vector<Slot>, std::greater<>> queue;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      gap.emplace_back(std::min(edges[k].rate * dt, 1.0));
      queue.push({1 + gap[k](rng), k});
    }
    while (!queue.empty() && queue.top().first <= last) {
      auto [step, k] = queue.top();
      queue.pop();
      const double t = static_cast<double>(step) * dt;
      fill_until(grid, next, t - 1e-9 * dt, s, out.values);
      fire(t, edges[k]);
      queue.push({step + 1 + gap[k](rng), k});
    }
  }
  fill_until(grid, next, std::numeric_limits<double>::infinity(), s, out.values);
  return out;
}

TrajectoryEnsemble sample_paths(const WeightedDigraph& g, Protocol protocol, const Vector& s0, double horizon,
                                const std::vector<double>& grid, const SampleOptions& options) {
  check_inputs(g, s0, horizon, grid);
  if (options.trials < 1) throw Error(Errc::BadParams, "at least one trial is required");
  TrajectoryEnsemble ens;
  ens.seed = options.seed;
  ens.scheme = options.scheme;
  ens.n_trials = options.trials;
  if (g.edges().empty()) ens.warnings.push_back("graph has no edges; every trial is constant");
  if (options.scheme.kind == SimulationScheme::Kind::Discretized) {
    double max_rate = 0.0;
    for (const auto& e : g.edges()) max_rate = std::max(max_rate, e.rate);
    const double p = max_rate / static_cast<double>(options.scheme.substeps);
    if (p > 0.1) {
      std::string msg = "max r*dt = " + std::to_string(p) + " exceeds 0.1; Bernoulli approximation is coarse";
      if (options.strict_discretization) throw Error(Errc::BadParams, msg);
      ens.warnings.push_back(msg);
    }
  }

  const auto n_trials = static_cast<std::size_t>(options.trials);
  std::vector<Trajectory> trials(n_trials);
  unsigned workers = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_trials));
  auto run = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < n_trials; k += stride) {
      auto rng = trial_rng(options.seed, k);
      trials[k] = simulate_path(g, protocol, s0, horizon, grid, options.scheme, rng);
    }
  };
  if (workers <= 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
    for (auto& th : pool) th.join();
  }

  // Reduction in trial order keeps the statistics independent of scheduling.
  const Index rows = static_cast<Index>(grid.size());
  Matrix sum = Matrix::Zero(rows, g.size());
  for (const auto& t : trials) sum += t.values;
  const double n = static_cast<double>(n_trials);
  ens.mean.times = grid;
  ens.mean.protocol = protocol;
  ens.mean.source = TrajectorySource::EnsembleMean;
  ens.mean.values = sum / n;
  if (n_trials > 1) {
    Matrix sq = Matrix::Zero(rows, g.size());
    for (const auto& t : trials) sq += (t.values - ens.mean.values).cwiseAbs2();
    ens.standard_error = (sq / ((n - 1.0) * n)).cwiseSqrt();
  } else {
    ens.standard_error = Matrix::Zero(rows, g.size());
  }
  if (options.keep_trials) ens.trials = std::move(trials);
  return ens;
}

Trajectory ensemble_mean(const TrajectoryEnsemble& e) {
  if (e.trials.empty()) {
    if (e.n_trials < 1) throw Error(Errc::BadParams, "ensemble has no trials");
    return e.mean;
  }
  Trajectory m = e.trials.front();
  for (std::size_t k = 1; k < e.trials.size(); ++k) m.values += e.trials[k].values;
  m.values /= static_cast<double>(e.trials.size());
  m.source = TrajectorySource::EnsembleMean;
  return m;
}

}  // namespace netdiff
