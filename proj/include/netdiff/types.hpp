#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string_view>

namespace netdiff {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Pairwise update rule applied when an edge clock ticks.
///
/// Conservative (P1) moves a fraction of the source agent's property to the
/// target, so the network total is invariant. NonConservative (P2) is a convex
/// polling update and drives the network towards consensus.
enum class Protocol { Conservative, NonConservative };

enum class Direction { In, Out };

/// "P1" or "P2".
std::string_view to_string(Protocol protocol) noexcept;

/// Accepts "P1"/"P2" (case-insensitive) as well as "conservative"/"nonconservative".
Protocol parse_protocol(std::string_view text);

}  // namespace netdiff
