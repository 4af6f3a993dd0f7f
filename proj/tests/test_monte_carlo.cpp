#include <doctest.h>

#include "netdiff/catalog.hpp"
#include "netdiff/dynamics.hpp"
#include "netdiff/error.hpp"
#include "netdiff/monte_carlo.hpp"
#include "oracles.hpp"

using namespace netdiff;

namespace {

Vector last_node(Index n) {
  Vector v = Vector::Zero(n);
  v(n - 1) = 1.0;
  return v;
}

// Fraction of (time, node) cells where |mean - analytic| <= k * stderr.
double within_fraction(const TrajectoryEnsemble& e, const Trajectory& exact, double k) {
  Index good = 0, total = 0;
  for (Index i = 0; i < e.mean.samples(); ++i)
    for (Index j = 0; j < e.mean.nodes(); ++j) {
      ++total;
      const double diff = std::abs(e.mean.values(i, j) - exact.values(i, j));
      if (diff <= k * e.standard_error(i, j) + 1e-12) ++good;
    }
  return double(good) / double(total);
}

}  // namespace

TEST_CASE("scheme parsing") {
  CHECK(SimulationScheme::parse("exact").kind == SimulationScheme::Kind::ExactEvent);
  auto d = SimulationScheme::parse("disc:1000");
  CHECK(d.kind == SimulationScheme::Kind::Discretized);
  CHECK(d.substeps == 1000);
  CHECK(d.to_string() == "disc:1000");
  CHECK_THROWS_AS(SimulationScheme::parse("disc:0"), Error);
  CHECK_THROWS_AS(SimulationScheme::parse("euler"), Error);
}

TEST_CASE("protocol updates") {
  Vector s(2);
  s << 2.0, 4.0;
  Edge e{0, 1, 0.25, 1.0};
  Vector p1 = s, p2 = s;
  apply_update(Protocol::Conservative, e, p1);
  CHECK(p1(0) == 3.0);
  CHECK(p1(1) == 3.0);
  apply_update(Protocol::NonConservative, e, p2);
  CHECK(p2(0) == 2.5);
  CHECK(p2(1) == 4.0);
}

TEST_CASE("two-node symmetric graph equilibrates") {
  SampleOptions opt;
  opt.trials = 2000;
  opt.seed = 11;
  Vector s0(2);
  s0 << 1, 0;
  auto e = sample_paths(catalog::path(2), Protocol::Conservative, s0, 20.0, {0.0, 20.0}, opt);
  for (Index j = 0; j < 2; ++j)
    CHECK(std::abs(e.mean.values(1, j) - 0.5) <= 3 * e.standard_error(1, j) + 1e-12);
  CHECK(e.mean.at(0) == s0);
}

TEST_CASE("edgeless graph stays constant") {
  WeightedDigraph g(3, {});
  SampleOptions opt;
  opt.trials = 5;
  Vector s0(3);
  s0 << 1, 2, 3;
  auto e = sample_paths(g, Protocol::NonConservative, s0, 1.0, {0.0, 0.5, 1.0}, opt);
  CHECK_FALSE(e.warnings.empty());
  for (const auto& t : e.trials)
    for (Index i = 0; i < t.samples(); ++i) CHECK(t.at(i) == s0);
}

TEST_CASE("ensemble mean") {
  TrajectoryEnsemble e;
  Trajectory a;
  a.times = {0.0, 1.0};
  a.values = Matrix::Constant(2, 3, 1.5);
  e.trials = {a};
  e.n_trials = 1;
  auto m = ensemble_mean(e);
  CHECK(m.values == a.values);
  CHECK(m.source == TrajectorySource::EnsembleMean);
  Trajectory b = a;
  b.values.setConstant(4.0);
  e.trials.push_back(b);
  e.n_trials = 2;
  CHECK(oracle::max_abs(ensemble_mean(e).values.array() - 2.75) == 0.0);
}

TEST_CASE("pathwise conservation and convexity") {
  std::mt19937_64 gen(123);
  for (int k = 0; k < 50; ++k) {
    const Index n = 2 + k % 7;
    auto g = oracle::random_strong_digraph(gen, n);
    Vector s0 = oracle::random_vector(gen, n, -1.0, 2.0);
    auto grid = time_grid(3.0, 6);
    auto rng = trial_rng(k, 0);
    const double total = s0.sum();
    int events = 0;
    simulate_path(g, Protocol::Conservative, s0, 3.0, grid, SimulationScheme::exact(), rng,
                  [&](double, const Edge&, const Vector&, const Vector& after) {
                    ++events;
                    CHECK(std::abs(after.sum() - total) <= 1e-12 * std::max(1.0, std::abs(total)) * n);
                  });
    CHECK(events > 0);
    auto rng2 = trial_rng(k, 1);
    simulate_path(g, Protocol::NonConservative, s0, 3.0, grid, SimulationScheme::discretized(200), rng2,
                  [&](double, const Edge&, const Vector& before, const Vector& after) {
                    CHECK(after.maxCoeff() <= before.maxCoeff() + 1e-15);
                    CHECK(after.minCoeff() >= before.minCoeff() - 1e-15);
                  });
  }
}

TEST_CASE("determinism and thread independence") {
  auto g = catalog::path5(0.2);
  auto grid = time_grid(5.0, 10);
  SampleOptions opt;
  opt.trials = 300;
  opt.seed = 42;
  auto a = sample_paths(g, Protocol::Conservative, last_node(5), 5.0, grid, opt);
  auto b = sample_paths(g, Protocol::Conservative, last_node(5), 5.0, grid, opt);
  opt.threads = 4;
  auto c = sample_paths(g, Protocol::Conservative, last_node(5), 5.0, grid, opt);
  CHECK(a.mean.values == b.mean.values);
  CHECK(a.mean.values == c.mean.values);
  CHECK(a.standard_error == c.standard_error);
  for (std::size_t k = 0; k < a.trials.size(); ++k) CHECK(a.trials[k].values == c.trials[k].values);
  CHECK(oracle::max_abs(ensemble_mean(a).values - a.mean.values) < 1e-15);
  opt.seed = 43;
  CHECK(sample_paths(g, Protocol::Conservative, last_node(5), 5.0, grid, opt).mean.values != a.mean.values);
}

TEST_CASE("asymmetric path ensembles match the analytic mean") {
  auto g = catalog::path5(0.2);
  auto grid = time_grid(15.0, 5);
  SampleOptions opt;
  opt.trials = 5000;
  opt.seed = 2024;
  opt.keep_trials = false;
  SUBCASE("P1") {
    auto e = sample_paths(g, Protocol::Conservative, last_node(5), 15.0, grid, opt);
    auto exact = expected_trajectory(transition_rate_matrix(g, Protocol::Conservative), last_node(5), grid);
    CHECK(within_fraction(e, exact, 3.0) == 1.0);
  }
  SUBCASE("P2") {
    auto e = sample_paths(g, Protocol::NonConservative, last_node(5), 15.0, grid, opt);
    auto exact = expected_trajectory(transition_rate_matrix(g, Protocol::NonConservative), last_node(5), grid);
    CHECK(within_fraction(e, exact, 3.0) == 1.0);
    for (Index j = 2; j < 5; ++j) CHECK(std::abs(e.mean.values(5, j) - 0.8003) < 0.02);
  }
}

TEST_CASE("statistical consistency over random graphs") {
  std::mt19937_64 gen(555);
  Index good = 0, total = 0;
  for (int k = 0; k < 50; ++k) {
    const Index n = 2 + k % 5;
    auto g = oracle::random_strong_digraph(gen, n);
    Protocol p = k % 2 ? Protocol::Conservative : Protocol::NonConservative;
    Vector s0 = oracle::random_vector(gen, n);
    auto grid = time_grid(2.0, 4);
    SampleOptions opt;
    opt.trials = 5000;
    opt.seed = 1000 + k;
    opt.keep_trials = false;
    auto e = sample_paths(g, p, s0, 2.0, grid, opt);
    auto exact = expected_trajectory(transition_rate_matrix(g, p), s0, grid);
    for (Index i = 1; i < e.mean.samples(); ++i)
      for (Index j = 0; j < n; ++j) {
        ++total;
        if (std::abs(e.mean.values(i, j) - exact.values(i, j)) <= 4 * e.standard_error(i, j) + 1e-12) ++good;
      }
  }
  CHECK(double(good) / double(total) >= 0.99);
}

TEST_CASE("discretized scheme agrees with exact events") {
  auto g = catalog::path5(1.0);
  auto grid = time_grid(4.0, 4);
  SampleOptions opt;
  opt.trials = 4000;
  opt.seed = 9;
  opt.keep_trials = false;
  opt.scheme = SimulationScheme::discretized(1000);
  auto e = sample_paths(g, Protocol::Conservative, last_node(5), 4.0, grid, opt);
  CHECK(e.warnings.empty());
  auto exact = expected_trajectory(transition_rate_matrix(g, Protocol::Conservative), last_node(5), grid);
  // Bernoulli substeps carry an O(dt) bias, negligible against the sampling error here.
  CHECK(within_fraction(e, exact, 4.0) == 1.0);

  opt.scheme = SimulationScheme::discretized(5);
  opt.trials = 10;
  auto coarse = sample_paths(g, Protocol::Conservative, last_node(5), 4.0, grid, opt);
  CHECK_FALSE(coarse.warnings.empty());
  opt.strict_discretization = true;
  CHECK_THROWS_WITH_AS(sample_paths(g, Protocol::Conservative, last_node(5), 4.0, grid, opt),
                       doctest::Contains("BadParams"), Error);
}

TEST_CASE("input validation") {
  SampleOptions opt;
  opt.trials = 2;
  auto g = catalog::path(3);
  CHECK_THROWS_AS(sample_paths(g, Protocol::Conservative, Vector::Zero(3), 0.0, {0.0}, opt), Error);
  CHECK_THROWS_AS(sample_paths(g, Protocol::Conservative, Vector::Zero(3), 1.0, {0.0, 2.0}, opt), Error);
  CHECK_THROWS_AS(sample_paths(g, Protocol::Conservative, Vector::Zero(2), 1.0, {0.0}, opt), Error);
  opt.trials = 0;
  CHECK_THROWS_AS(sample_paths(g, Protocol::Conservative, Vector::Zero(3), 1.0, {0.0}, opt), Error);
}
