#include <doctest.h>

#include "netdiff/catalog.hpp"
#include "netdiff/error.hpp"
#include "netdiff/mdp.hpp"
#include "netdiff/spectral.hpp"
#include "oracles.hpp"

using namespace netdiff;

namespace {

MdpConfig small_config(Index n, Index w, std::uint64_t seed, std::int64_t steps) {
  MdpConfig c;
  c.actions = random_complete_actions(n, w, Protocol::Conservative, seed);
  c.reward = Matrix::Zero(n, w);
  c.reward.row(n - 1).setConstant(5.0);
  c.steps = steps;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("epsilon-greedy selection") {
  std::mt19937_64 rng(1);
  Vector row(3);
  row << 0, 5, 3;
  for (int k = 0; k < 100; ++k) CHECK(epsilon_greedy(row, 1.0, rng) == 1);
  Vector tie(3);
  tie << 5, 5, 0;
  for (int k = 0; k < 100; ++k) CHECK(epsilon_greedy(tie, 1.0, rng) == 0);

  // Uniform under epsilon = 0: chi-square over 1e5 draws, 2 degrees of freedom.
  std::array<double, 3> counts{};
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) counts[static_cast<std::size_t>(epsilon_greedy(row, 0.0, rng))] += 1;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - draws / 3.0) * (c - draws / 3.0) / (draws / 3.0);
  CHECK(chi2 < 13.8);  // p = 0.001
  for (double c : counts) CHECK(std::abs(c - draws / 3.0) < 3 * std::sqrt(draws * (1.0 / 3) * (2.0 / 3)));
}

TEST_CASE("stationary distribution") {
  Matrix q(2, 2);
  q << -1, 2, 1, -2;
  Vector v = stationary_distribution(q, Protocol::Conservative);
  CHECK(v(0) == doctest::Approx(2.0 / 3));
  CHECK(v(1) == doctest::Approx(1.0 / 3));
  // The same chain written row-wise.
  Vector w = stationary_distribution(Matrix(q.transpose()), Protocol::NonConservative);
  CHECK(oracle::max_abs(v - w) < 1e-12);

  Matrix star(5, 5);
  star << -3.6, 0.9, 0.9, 0.9, 0.9,  //
      0.9, -0.975, 0.025, 0.025, 0.025,  //
      0.9, 0.025, -0.975, 0.025, 0.025,  //
      0.9, 0.025, 0.025, -0.975, 0.025,  //
      0.9, 0.025, 0.025, 0.025, -0.975;
  CHECK(oracle::max_abs(stationary_distribution(star, Protocol::Conservative) - Vector::Constant(5, 0.2)) < 1e-12);

  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const Index n = 2 + k % 7;
    auto g = oracle::random_symmetric_graph(rng, n);
    Matrix s = transition_rate_matrix(g, Protocol::Conservative).rates;
    CHECK(oracle::max_abs(stationary_distribution(s, Protocol::Conservative) - Vector::Constant(n, 1.0 / n)) < 1e-10);
    Matrix a = transition_rate_matrix(oracle::random_strong_digraph(rng, n), Protocol::Conservative).rates;
    Vector p = stationary_distribution(a, Protocol::Conservative);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    CHECK(oracle::max_abs(a * p) < 1e-10 * std::max(1.0, oracle::max_abs(a)));
  }
  Matrix split = Matrix::Zero(4, 4);
  split << -1, 1, 0, 0, 1, -1, 0, 0, 0, 0, -1, 1, 0, 0, 1, -1;
  CHECK_THROWS_WITH_AS(stationary_distribution(split, Protocol::Conservative), doctest::Contains("Reducible"), Error);
}

TEST_CASE("random complete actions are valid generators") {
  for (auto p : {Protocol::Conservative, Protocol::NonConservative}) {
    auto acts = random_complete_actions(6, 10, p, 3);
    CHECK(acts.size() == 10);
    for (const auto& a : acts) {
      CHECK(is_ctmc_generator(a, p).valid);
      for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < 6; ++j)
          if (i != j) CHECK(a(i, j) > 0.0);
    }
    CHECK(random_complete_actions(6, 10, p, 3)[4] == acts[4]);
  }
}

TEST_CASE("single action reduces to the CTMC") {
  Matrix q = transition_rate_matrix(catalog::path5(0.5), Protocol::Conservative).rates;
  MdpConfig c;
  c.actions = {q};
  c.reward = Matrix::Zero(5, 1);
  c.reward(2, 0) = 1.0;
  c.steps = 20000;
  c.seed = 77;
  auto trials = run_qlearning_trials(c, 30);
  Vector v0 = stationary_distribution(q, Protocol::Conservative);
  Matrix frac(30, 5);
  for (Index k = 0; k < 30; ++k) {
    const auto& r = trials[static_cast<std::size_t>(k)];
    CHECK(r.grand == q);
    CHECK(oracle::max_abs(r.stationary - v0) < 1e-12);
    frac.row(k) = (r.occupancy_time / r.total_time).transpose();
  }
  Vector mean = frac.colwise().mean();
  for (Index i = 0; i < 5; ++i) {
    const double var = (frac.col(i).array() - mean(i)).square().sum() / 29.0;
    CHECK(std::abs(mean(i) - v0(i)) <= 3.0 * std::sqrt(var / 30.0));
  }
}

TEST_CASE("quality stays bounded and the grand matrix stays a generator") {
  for (int k = 0; k < 50; ++k) {
    auto c = small_config(4 + k % 4, 3 + k % 5, 100 + k, 3000);
    c.protocol = k % 2 ? Protocol::Conservative : Protocol::NonConservative;
    c.actions = random_complete_actions(c.states(), static_cast<Index>(c.actions.size()), c.protocol, 100 + k);
    c.reward_mode = k % 3 ? RewardMode::MaxNext : RewardMode::Realized;
    c.history_stride = 50;
    for (Index a = 0; a < static_cast<Index>(c.actions.size()); ++a) c.tracked.push_back({0, a});
    auto r = run_qlearning(c);
    const double bound = 5.0 / (1.0 - c.discount) + 5.0;
    CHECK(r.quality.minCoeff() >= 0.0);
    CHECK(r.quality.maxCoeff() <= bound);
    CHECK(r.history.minCoeff() >= 0.0);
    CHECK(r.history.maxCoeff() <= bound);
    CHECK(is_ctmc_generator(r.grand, c.protocol).valid);
    CHECK(r.stationary.minCoeff() >= 0.0);
    CHECK(std::abs(r.stationary.sum() - 1.0) < 1e-12);
    Matrix m = c.protocol == Protocol::Conservative ? r.grand : Matrix(r.grand.transpose());
    CHECK(oracle::max_abs(m * r.stationary) < 1e-9);
    std::int64_t visits = 0;
    for (auto v : r.visits) visits += v;
    CHECK(visits == c.steps);
    CHECK(r.history_steps.back() == c.steps);
  }
}

TEST_CASE("grand matrix columns come from the action set") {
  auto c = small_config(5, 4, 9, 500);
  auto r = run_qlearning(c);
  for (Index j = 0; j < 5; ++j) {
    bool found = false;
    for (const auto& a : c.actions) found = found || a.col(j) == r.grand.col(j);
    CHECK(found);
  }
}

TEST_CASE("reproducibility") {
  auto c = small_config(6, 5, 21, 20000);
  c.tracked = {{0, 0}, {1, 2}};
  auto a = run_qlearning(c), b = run_qlearning(c);
  CHECK(a.quality == b.quality);
  CHECK(a.grand == b.grand);
  CHECK(a.history == b.history);
  CHECK(a.reward_trace == b.reward_trace);
  CHECK(a.occupancy_time == b.occupancy_time);
  auto t1 = run_qlearning_trials(c, 4, 1), t4 = run_qlearning_trials(c, 4, 4);
  for (std::size_t k = 0; k < 4; ++k) CHECK(t1[k].quality == t4[k].quality);
}

TEST_CASE("reward modes") {
  CHECK(parse_reward_mode("max-next") == RewardMode::MaxNext);
  CHECK(parse_reward_mode("paper") == RewardMode::MaxNext);
  CHECK(to_string(RewardMode::MaxNext) == "max-next");
  CHECK(parse_reward_mode("realized") == RewardMode::Realized);
  CHECK_THROWS_AS(parse_reward_mode("other"), Error);
  // With an action-independent reward table the two targets coincide.
  auto c = small_config(4, 3, 5, 2000);
  auto a = run_qlearning(c);
  c.reward_mode = RewardMode::Realized;
  CHECK(run_qlearning(c).quality == a.quality);
  // Realized rewards only credit the action that was active.
  c.reward.setZero();
  c.reward.col(0).setConstant(1.0);
  auto realized = run_qlearning(c);
  c.reward_mode = RewardMode::MaxNext;
  auto max_next = run_qlearning(c);
  CHECK(realized.quality != max_next.quality);
}

TEST_CASE("greedy policy is a fixed point of a converged table") {
  // Two states, two actions: action 1 keeps the chain in the rewarded state 2 far longer.
  Matrix slow(2, 2), fast(2, 2);
  slow << -1, 0.1, 1, -0.1;
  fast << -1, 1, 1, -1;
  MdpConfig c;
  c.actions = {fast, slow};
  c.reward = Matrix::Zero(2, 2);
  c.reward.row(1).setConstant(1.0);
  c.reward_mode = RewardMode::Realized;
  c.reward(1, 0) = 0.0;
  c.steps = 50000;
  c.seed = 3;
  c.exploitation = 0.3;
  auto trained = run_qlearning(c);
  auto greedy = [](const Matrix& q) {
    std::vector<Index> out;
    for (Index s = 0; s < q.rows(); ++s) {
      Index best = 0;
      q.row(s).maxCoeff(&best);
      out.push_back(best);
    }
    return out;
  };
  const auto policy = greedy(trained.quality);
  c.exploitation = 1.0;
  c.initial_quality = trained.quality;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    c.seed = seed;
    c.steps = 5000;
    CHECK(greedy(run_qlearning(c).quality) == policy);
  }
}

TEST_CASE("learning curve proxy") {
  LearningResult r;
  r.history_steps = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  r.history.resize(10, 1);
  r.history.col(0) << 0, 50, 80, 95, 99, 100, 100, 100, 100, 100;
  auto p = learning_curve_proxy(r);
  CHECK(p.passed);
  CHECK(p.range[0] == 100.0);
  r.history.col(0) << 0, 10, 20, 30, 40, 50, 60, 70, 80, 100;
  CHECK(learning_curve_proxy(r, 0.2).passed == false);
}

TEST_CASE("configuration errors") {
  auto c = small_config(4, 2, 1, 10);
  auto bad = c;
  bad.learning_rate = 0.0;
  CHECK_THROWS_WITH_AS(run_qlearning(bad), doctest::Contains("BadConfig"), Error);
  bad = c;
  bad.discount = 1.0;
  CHECK_THROWS_AS(run_qlearning(bad), Error);
  bad = c;
  bad.actions[0](0, 1) = -1.0;
  CHECK_THROWS_AS(run_qlearning(bad), Error);
  bad = c;
  bad.reward = Matrix::Zero(3, 2);
  CHECK_THROWS_AS(run_qlearning(bad), Error);
  // A state with no outgoing rate stops the loop.
  Matrix absorbing = Matrix::Zero(2, 2);
  absorbing << 0, 1, 0, -1;
  MdpConfig a;
  a.actions = {absorbing};
  a.reward = Matrix::Zero(2, 1);
  a.steps = 10;
  a.initial_state = 1;
  CHECK_THROWS_WITH_AS(run_qlearning(a), doctest::Contains("AbsorbingState"), Error);
}
