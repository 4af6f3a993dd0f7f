#pragma once

#include "netdiff/graph.hpp"
#include "netdiff/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace netdiff {

struct SpectralOptions {
  /// |q| < snap * max|Q_ii| is treated as an exact zero eigenvalue.
  double snap = 1e-9;
  /// Eigenvector matrices with a larger 2-norm condition number are rejected.
  double max_condition = 1e8;
};

/// Q = A diag(q) A^-1. Columns of `right` are unit right eigenvectors, rows
/// of `left` (= A^-1) are the biorthogonally scaled left eigenvectors.
/// Eigenvalues are sorted by real part, then imaginary part, ascending, so the
/// steady mode (q = 0) of a generator is last.
struct SpectralDecomposition {
  CVector eigenvalues;
  CMatrix right;
  CMatrix left;
  std::optional<Index> steady_index;
  double condition = 1.0;
  bool symmetric = false;

  Index size() const noexcept { return eigenvalues.size(); }
  CMatrix reconstruct() const;
  bool real_spectrum(double tol = 1e-12) const;

  /// Rescales each right eigenvector by a unit phase so that it points along
  /// the matching column of `reference` (sign-only for real vectors). The left
  /// rows are rescaled by the inverse phase so biorthogonality is kept.
  void align_to(const CMatrix& reference);
};

/// Throws Error{Defective} if the eigenvector matrix is too ill-conditioned.
SpectralDecomposition eigendecompose(const Matrix& q, const SpectralOptions& options = {});
inline SpectralDecomposition eigendecompose(const TransitionRateMatrix& q,
                                            const SpectralOptions& options = {}) {
  return eigendecompose(q.rates, options);
}

/// exp(Q t) by scaling and squaring with a Pade approximant.
Matrix matrix_exponential(const Matrix& q, double t);

struct SteadyStatePair {
  Vector right;  // unit v_Rs with positive entry sum
  Vector left;   // unit v_Ls with positive entry sum
  double psi = 0.0;
  double omega = 0.0;
};

/// Throws Error{NoZeroEigenvalue} when Q is nonsingular.
SteadyStatePair steady_state_vectors(const Matrix& q);
inline SteadyStatePair steady_state_vectors(const TransitionRateMatrix& q) {
  return steady_state_vectors(q.rates);
}

struct GeneratorReport {
  bool valid = true;
  double min_off_diagonal = 0.0;
  double max_sum_residual = 0.0;
  std::vector<std::string> violations;

  explicit operator bool() const noexcept { return valid; }
};

GeneratorReport is_ctmc_generator(const Matrix& q, Protocol protocol, double tol = 1e-9);

/// True when every eigenvalue lies inside the union of the row Gershgorin
/// disks of q (inflated by slack).
bool within_gershgorin_disks(const Matrix& q, const CVector& eigenvalues, double slack = 1e-9);

/// Real part of m. Throws Error{ImaginaryResidue} if any imaginary part
/// exceeds tol in absolute value.
Matrix real_part_checked(const CMatrix& m, double tol = 1e-8);
Vector real_part_checked(const CVector& v, double tol = 1e-8);

}  // namespace netdiff
