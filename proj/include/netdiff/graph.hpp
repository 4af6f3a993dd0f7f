#pragma once

#include "netdiff/types.hpp"

#include <cstdint>
#include <vector>

namespace netdiff {

/// Directed link i -> j. In the conservative protocol the property flows from
/// `to` into `from` when the edge fires; in the non-conservative protocol
/// `from` polls `to`. Either way the adjacency entry is A(from, to) = c * r.
struct Edge {
  Index from = 0;
  Index to = 0;
  double confidence = 1.0;  // C_ij in (0, 1]
  double rate = 1.0;        // r_ij > 0

  double weight() const noexcept { return confidence * rate; }
};

class WeightedDigraph {
 public:
  WeightedDigraph() = default;
  /// Throws Error{DuplicateEdge|SelfLoop|BadWeight|BadIndex}.
  WeightedDigraph(Index n, std::vector<Edge> edges);

  Index size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Same agents, every edge direction flipped.
  WeightedDigraph reversed() const;

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
};

inline WeightedDigraph build_graph(Index n, std::vector<Edge> edges) {
  return WeightedDigraph(n, std::move(edges));
}

Matrix adjacency_matrix(const WeightedDigraph& g);
Matrix degree_matrix(const WeightedDigraph& g, Direction direction);
Matrix laplacian(const WeightedDigraph& g, Direction direction);

struct TransitionRateMatrix {
  Matrix rates;
  Protocol protocol = Protocol::Conservative;

  Index size() const noexcept { return rates.rows(); }
};

/// P1: Q = -L_in (zero column sums). P2: Q = -L_out (zero row sums).
TransitionRateMatrix transition_rate_matrix(const WeightedDigraph& g, Protocol protocol);

/// Directed reachability on the nonzero off-diagonal pattern of m.
bool strongly_connected(const Matrix& m);
bool strongly_connected(const WeightedDigraph& g);

enum class RandomModel { ErdosRenyi, BarabasiAlbert, WattsStrogatz, RandomComplete };

struct RandomGraphParams {
  Index n = 0;
  double probability = 0.0;  // Erdos-Renyi link probability
  Index attachments = 1;     // Barabasi-Albert edges per new node
  Index neighbors = 2;       // Watts-Strogatz ring degree (even)
  double rewiring = 0.0;     // Watts-Strogatz rewiring probability
};

RandomModel parse_random_model(std::string_view text);

/// Erdos-Renyi, Barabasi-Albert and Watts-Strogatz produce undirected graphs
/// stored as symmetric unit-weight edge pairs. RandomComplete links every
/// ordered pair with confidence drawn from (0, 1] and unit rate.
/// Throws Error{BadParams}.
WeightedDigraph generate_random_graph(RandomModel model, const RandomGraphParams& params,
                                      std::uint64_t seed);

}  // namespace netdiff
