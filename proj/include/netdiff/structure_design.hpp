#pragma once

#include "netdiff/spectral.hpp"

#include <vector>

namespace netdiff {

struct EigenvalueEdit {
  Index mode = 0;
  Complex value;
};

/// Keep the eigenvector basis of `base`, replace selected eigenvalues.
struct RespectrumPlan {
  SpectralDecomposition base;
  std::vector<EigenvalueEdit> edits;
  Protocol protocol = Protocol::Conservative;
  /// Eigenvalues closer than cluster_tol * max(1, max|q|) form one cluster.
  double cluster_tol = 1e-8;
};

struct EdgeChange {
  Index from = 0;
  Index to = 0;
  double before = 0.0;
  double after = 0.0;
};

struct RespectrumResult {
  Matrix rates;
  GeneratorReport report;
  std::vector<EdgeChange> changes;  // off-diagonal entries that moved
  CVector eigenvalues;
};

/// Groups of indices whose eigenvalues coincide within tol.
std::vector<std::vector<Index>> eigenvalue_clusters(const CVector& eigenvalues, double tol);

/// Q_new = A diag(q') A^-1. Throws SteadyModeEdited, InvalidEdit (partial
/// cluster edit, unpaired complex edit, eigenvalue with positive real part),
/// BadIndex. Generator validity is reported, not enforced.
RespectrumResult respectrum(const RespectrumPlan& plan, const Matrix& original);
RespectrumResult respectrum(const RespectrumPlan& plan);

/// Eigendecomposition whose degenerate eigenspaces carry an orthonormal basis
/// built by Gram-Schmidt on the projected unit vectors e_1, e_2, ..., so the
/// basis depends only on the eigenspace, not on solver output.
SpectralDecomposition degenerate_basis_choice(const Matrix& q, double tol = 1e-8);

}  // namespace netdiff
