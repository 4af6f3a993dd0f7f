#include "netdiff/catalog.hpp"

#include <cmath>

namespace netdiff::catalog {

WeightedDigraph path5(double alpha) {
  std::vector<Edge> edges;
  for (Index i = 0; i + 1 < 5; ++i) {
    edges.push_back({i, i + 1, 1.0, 1.0});
    edges.push_back({i + 1, i, alpha, 1.0});
  }
  return WeightedDigraph(5, std::move(edges));
}

WeightedDigraph path(Index n) {
  std::vector<Edge> edges;
  for (Index i = 0; i + 1 < n; ++i) {
    edges.push_back({i, i + 1, 1.0, 1.0});
    edges.push_back({i + 1, i, 1.0, 1.0});
  }
  return WeightedDigraph(n, std::move(edges));
}

WeightedDigraph asymmetric_cycle4() {
  return WeightedDigraph(4, {{0, 1, 1.0, 1.0},
                             {1, 2, 0.5, 1.0},
                             {2, 3, 1.0, 1.0},
                             {3, 0, 0.5, 1.0},
                             {0, 3, 1.0, 1.0},
                             {3, 2, 0.5, 1.0},
                             {2, 1, 1.0, 1.0},
                             {1, 0, 0.5, 1.0}});
}

WeightedDigraph asymmetric_cycle4(Protocol protocol) {
  return protocol == Protocol::Conservative ? asymmetric_cycle4().reversed() : asymmetric_cycle4();
}

CMatrix cycle4_reference_basis(Protocol protocol) {
  const double h = std::sqrt(0.5), s = std::sqrt(0.4);
  Matrix a(4, 4);
  if (protocol == Protocol::Conservative) {
    a.col(0) << -0.5, 0.5, -0.5, 0.5;
    a.col(1) << -h, 0, h, 0;
    a.col(2) << 0, -h, 0, h;
    a.col(3) << -0.5 * s, -s, -0.5 * s, -s;
  } else {
    a.col(0) << -s, 0.5 * s, -s, 0.5 * s;
    a.col(1) << h, 0, -h, 0;
    a.col(2) << 0, -h, 0, h;
    a.col(3) << 0.5, 0.5, 0.5, 0.5;
  }
  return a.cast<Complex>();
}

WeightedDigraph star5() {
  std::vector<Edge> edges;
  for (Index leaf = 1; leaf < 5; ++leaf) {
    edges.push_back({0, leaf, 1.0, 1.0});
    edges.push_back({leaf, 0, 1.0, 1.0});
  }
  return WeightedDigraph(5, std::move(edges));
}

WeightedDigraph complete(Index n) {
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) edges.push_back({i, j, 1.0, 1.0});
  return WeightedDigraph(n, std::move(edges));
}

}  // namespace netdiff::catalog
