#include "netdiff/structure_design.hpp"

#include "netdiff/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace netdiff {
namespace {

std::string mode_name(Index k) { return "mode " + std::to_string(k + 1); }

}  // namespace

std::vector<std::vector<Index>> eigenvalue_clusters(const CVector& ev, double tol) {
  const Index n = ev.size();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (std::abs(ev(i) - ev(j)) < tol) parent[find(j)] = find(i);
  std::map<Index, std::vector<Index>> groups;
  for (Index i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<Index>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end());
  return out;
}

RespectrumResult respectrum(const RespectrumPlan& plan) {
  return respectrum(plan, real_part_checked(plan.base.reconstruct()));
}

RespectrumResult respectrum(const RespectrumPlan& plan, const Matrix& original) {
  const SpectralDecomposition& d = plan.base;
  const Index n = d.size();
  const double scale = std::max(1.0, d.eigenvalues.cwiseAbs().maxCoeff());
  const double tol = plan.cluster_tol * scale;

  CVector q = d.eigenvalues;
  std::map<Index, Complex> edits;
  for (const auto& e : plan.edits) {
    if (e.mode < 0 || e.mode >= n) throw Error(Errc::BadIndex, mode_name(e.mode) + " does not exist");
    if (d.steady_index && e.mode == *d.steady_index)
      throw Error(Errc::SteadyModeEdited, mode_name(e.mode) + " is the steady mode and must stay at 0");
    if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
      throw Error(Errc::InvalidEdit, mode_name(e.mode) + " edit is not finite");
    if (e.value.real() > tol)
      throw Error(Errc::InvalidEdit, mode_name(e.mode) + " edit has a positive real part");
    if (!edits.emplace(e.mode, e.value).second)
      throw Error(Errc::InvalidEdit, mode_name(e.mode) + " is edited twice");
  }

  for (const auto& cluster : eigenvalue_clusters(d.eigenvalues, tol)) {
    Index edited = 0;
    for (Index k : cluster) edited += edits.count(k);
    if (edited == 0) continue;
    if (edited != static_cast<Index>(cluster.size()))
      throw Error(Errc::InvalidEdit, mode_name(cluster.front()) + " belongs to a degenerate cluster of " +
                                         std::to_string(cluster.size()) + " modes; edit the whole cluster");
    const Complex v = edits.at(cluster.front());
    for (Index k : cluster)
      if (std::abs(edits.at(k) - v) > tol)
        throw Error(Errc::InvalidEdit, "modes of one degenerate cluster must receive the same eigenvalue");
  }

  for (const auto& [k, v] : edits) {
    const Complex old = d.eigenvalues(k);
    if (std::abs(old.imag()) <= tol) {
      if (std::abs(v.imag()) > tol)
        throw Error(Errc::InvalidEdit, mode_name(k) + " is real; a complex value needs a conjugate partner");
      q(k) = Complex(v.real(), 0.0);
      continue;
    }
    // Complex mode: its conjugate partner must be edited to conj(v).
    Index partner = -1;
    for (Index j = 0; j < n; ++j)
      if (j != k && std::abs(d.eigenvalues(j) - std::conj(old)) <= tol) partner = j;
    auto it = partner >= 0 ? edits.find(partner) : edits.end();
    if (it == edits.end() || std::abs(it->second - std::conj(v)) > tol)
      throw Error(Errc::InvalidEdit, mode_name(k) + " is complex; edit its conjugate partner to the conjugate value");
    q(k) = v;
  }

  RespectrumResult r;
  r.eigenvalues = q;
  CMatrix rebuilt = d.right * q.asDiagonal() * d.left;
  r.rates = real_part_checked(rebuilt, 1e-8 * scale);
  r.report = is_ctmc_generator(r.rates, plan.protocol);
  if (original.rows() == n && original.cols() == n) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j && std::abs(r.rates(i, j) - original(i, j)) > 1e-12 * scale)
          r.changes.push_back({i, j, original(i, j), r.rates(i, j)});
  }
  return r;
}

SpectralDecomposition degenerate_basis_choice(const Matrix& q, double tol) {
  SpectralDecomposition d = eigendecompose(q);
  const Index n = d.size();
  const double scale = std::max(1.0, d.eigenvalues.cwiseAbs().maxCoeff());
  bool changed = false;
  for (const auto& cluster : eigenvalue_clusters(d.eigenvalues, tol * scale)) {
    if (cluster.size() < 2) continue;
    // Spectral projector onto the cluster eigenspace.
    CMatrix proj = CMatrix::Zero(n, n);
    for (Index k : cluster) proj += d.right.col(k) * d.left.row(k);
    std::vector<CVector> basis;
    for (Index e = 0; e < n && basis.size() < cluster.size(); ++e) {
      CVector v = proj.col(e);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) v -= b.dot(v) * b;
      double nv = v.norm();
      if (nv > 1e-8) basis.push_back(v / nv);
    }
    if (basis.size() != cluster.size())
      throw Error(Errc::Defective, "degenerate eigenspace has deficient dimension");
    for (std::size_t k = 0; k < cluster.size(); ++k) {
      CVector v = basis[k];
      if (v.imag().cwiseAbs().maxCoeff() <= 1e-12) v = v.real().cast<Complex>();
      d.right.col(cluster[k]) = v;
    }
    changed = true;
  }
  if (changed) {
    Eigen::JacobiSVD<CMatrix> svd(d.right);
    const auto& s = svd.singularValues();
    d.condition = s(0) / s(s.size() - 1);
    if (!(d.condition <= SpectralOptions{}.max_condition))
      throw Error(Errc::Defective, "reorthogonalized eigenvector matrix is ill-conditioned");
    d.left = d.right.partialPivLu().inverse();
  }
  return d;
}

}  // namespace netdiff
