#include "netdiff/graph.hpp"

#include "netdiff/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>

namespace netdiff {
namespace {

std::string edge_name(const Edge& e) {
  return "edge (" + std::to_string(e.from + 1) + "->" + std::to_string(e.to + 1) + ")";
}

void reach(const Matrix& m, Index start, bool transpose, std::vector<char>& seen) {
  std::vector<Index> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    Index u = stack.back();
    stack.pop_back();
    for (Index v = 0; v < m.rows(); ++v) {
      double x = transpose ? m(v, u) : m(u, v);
      if (v != u && x != 0.0 && !seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
}

void add_undirected(std::set<std::pair<Index, Index>>& links, Index a, Index b) {
  if (a == b) return;
  links.insert({std::min(a, b), std::max(a, b)});
}

}  // namespace

WeightedDigraph::WeightedDigraph(Index n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n_ <= 0) throw Error(Errc::BadParams, "agent count must be positive");
  std::set<std::pair<Index, Index>> seen;
  for (const auto& e : edges_) {
    if (e.from < 0 || e.from >= n_ || e.to < 0 || e.to >= n_)
      throw Error(Errc::BadIndex, edge_name(e) + " references an agent outside [1, " +
                                      std::to_string(n_) + "]");
    if (e.from == e.to) throw Error(Errc::SelfLoop, edge_name(e) + " is a self-loop");
    if (!(e.confidence > 0.0 && e.confidence <= 1.0))
      throw Error(Errc::BadWeight, edge_name(e) + " confidence must lie in (0, 1]");
    if (!(e.rate > 0.0) || !std::isfinite(e.rate))
      throw Error(Errc::BadWeight, edge_name(e) + " rate must be positive and finite");
    if (!seen.insert({e.from, e.to}).second)
      throw Error(Errc::DuplicateEdge, edge_name(e) + " appears more than once");
  }
}

WeightedDigraph WeightedDigraph::reversed() const {
  std::vector<Edge> flipped = edges_;
  for (auto& e : flipped) std::swap(e.from, e.to);
  return WeightedDigraph(n_, std::move(flipped));
}

Matrix adjacency_matrix(const WeightedDigraph& g) {
  Matrix a = Matrix::Zero(g.size(), g.size());
  for (const auto& e : g.edges()) a(e.from, e.to) = e.weight();
  return a;
}

Matrix degree_matrix(const WeightedDigraph& g, Direction direction) {
  Matrix a = adjacency_matrix(g);
  // Plain index-order sums so in/out degrees of transposed matrices agree bitwise.
  const Index n = a.rows();
  Vector d = Vector::Zero(n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k) d(i) += direction == Direction::In ? a(k, i) : a(i, k);
  return d.asDiagonal();
}

Matrix laplacian(const WeightedDigraph& g, Direction direction) {
  return degree_matrix(g, direction) - adjacency_matrix(g);
}

TransitionRateMatrix transition_rate_matrix(const WeightedDigraph& g, Protocol protocol) {
  Direction dir = protocol == Protocol::Conservative ? Direction::In : Direction::Out;
  return {-laplacian(g, dir), protocol};
}

bool strongly_connected(const Matrix& m) {
  const Index n = m.rows();
  if (n <= 1) return true;
  std::vector<char> fwd(n, 0), bwd(n, 0);
  reach(m, 0, false, fwd);
  reach(m, 0, true, bwd);
  return std::all_of(fwd.begin(), fwd.end(), [](char c) { return c != 0; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](char c) { return c != 0; });
}

bool strongly_connected(const WeightedDigraph& g) { return strongly_connected(adjacency_matrix(g)); }

RandomModel parse_random_model(std::string_view text) {
  if (text == "erdos-renyi" || text == "er") return RandomModel::ErdosRenyi;
  if (text == "barabasi-albert" || text == "ba") return RandomModel::BarabasiAlbert;
  if (text == "watts-strogatz" || text == "ws") return RandomModel::WattsStrogatz;
  if (text == "random-complete" || text == "complete") return RandomModel::RandomComplete;
  throw Error(Errc::BadParams, "unknown random graph model '" + std::string(text) + "'");
}

WeightedDigraph generate_random_graph(RandomModel model, const RandomGraphParams& p, std::uint64_t seed) {
  if (p.n <= 0) throw Error(Errc::BadParams, "n must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::set<std::pair<Index, Index>> links;
  const Index n = p.n;

  switch (model) {
    case RandomModel::RandomComplete: {
      std::vector<Edge> edges;
      edges.reserve(static_cast<std::size_t>(n * (n - 1)));
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          if (i != j) edges.push_back({i, j, 1.0 - unif(rng), 1.0});
      return WeightedDigraph(n, std::move(edges));
    }
    case RandomModel::ErdosRenyi: {
      if (!(p.probability >= 0.0 && p.probability <= 1.0))
        throw Error(Errc::BadParams, "Erdos-Renyi probability must lie in [0, 1]");
      for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
          if (unif(rng) < p.probability) links.insert({i, j});
      break;
    }
    case RandomModel::BarabasiAlbert: {
      const Index m = p.attachments;
      if (m < 1 || m >= n) throw Error(Errc::BadParams, "Barabasi-Albert needs 1 <= attachments < n");
      // Seed clique on m+1 nodes, then preferential attachment by endpoint list.
      std::vector<Index> ends;
      for (Index i = 0; i <= m; ++i)
        for (Index j = i + 1; j <= m; ++j) {
          links.insert({i, j});
          ends.push_back(i);
          ends.push_back(j);
        }
      for (Index v = m + 1; v < n; ++v) {
        std::set<Index> targets;
        std::uniform_int_distribution<std::size_t> pick(0, ends.size() - 1);
        while (static_cast<Index>(targets.size()) < m) targets.insert(ends[pick(rng)]);
        for (Index t : targets) {
          add_undirected(links, v, t);
          ends.push_back(v);
          ends.push_back(t);
        }
      }
      break;
    }
    case RandomModel::WattsStrogatz: {
      const Index k = p.neighbors;
      if (k < 2 || k % 2 != 0 || k >= n)
        throw Error(Errc::BadParams, "Watts-Strogatz needs an even neighbor count in [2, n)");
      if (!(p.rewiring >= 0.0 && p.rewiring <= 1.0))
        throw Error(Errc::BadParams, "Watts-Strogatz rewiring probability must lie in [0, 1]");
      for (Index i = 0; i < n; ++i)
        for (Index s = 1; s <= k / 2; ++s) add_undirected(links, i, (i + s) % n);
      std::uniform_int_distribution<Index> node(0, n - 1);
      for (Index s = 1; s <= k / 2; ++s)
        for (Index i = 0; i < n; ++i) {
          Index j = (i + s) % n;
          std::pair<Index, Index> key{std::min(i, j), std::max(i, j)};
          if (!links.count(key) || unif(rng) >= p.rewiring) continue;
          Index degree_i = 0;
          for (const auto& l : links) degree_i += (l.first == i || l.second == i);
          if (degree_i >= n - 1) continue;
          Index t;
          do {
            t = node(rng);
          } while (t == i || links.count({std::min(i, t), std::max(i, t)}));
          links.erase(key);
          add_undirected(links, i, t);
        }
      break;
    }
  }

  std::vector<Edge> edges;
  edges.reserve(links.size() * 2);
  for (const auto& [a, b] : links) {
    edges.push_back({a, b, 1.0, 1.0});
    edges.push_back({b, a, 1.0, 1.0});
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.from, x.to) < std::tie(y.from, y.to); });
  return WeightedDigraph(n, std::move(edges));
}

}  // namespace netdiff
