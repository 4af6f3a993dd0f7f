#pragma once

#include "netdiff/graph.hpp"

namespace netdiff::catalog {

/// Five-node path: links i -> i+1 carry weight 1, links i+1 -> i carry alpha.
WeightedDigraph path5(double alpha);

/// Undirected path on n nodes with unit weights.
WeightedDigraph path(Index n);

/// Four-node asymmetric cycle: 1->2 (1), 2->3 (0.5), 3->4 (1), 4->1 (0.5) and
/// the reverse links 1->4 (1), 4->3 (0.5), 3->2 (1), 2->1 (0.5).
WeightedDigraph asymmetric_cycle4();
/// The cycle oriented so that both protocols share the same spectrum labels:
/// reversed for P1, as drawn for P2.
WeightedDigraph asymmetric_cycle4(Protocol protocol);
/// Unit right eigenvectors of asymmetric_cycle4(protocol) in the sign
/// convention of the published case study, modes ordered -3, -2, -1, 0.
CMatrix cycle4_reference_basis(Protocol protocol);

/// Star on five nodes, node 1 at the center, symmetric unit links.
WeightedDigraph star5();

/// Complete graph with symmetric unit links.
WeightedDigraph complete(Index n);

}  // namespace netdiff::catalog
