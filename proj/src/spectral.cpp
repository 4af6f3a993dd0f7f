#include "netdiff/spectral.hpp"

#include "netdiff/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace netdiff {
namespace {

double diagonal_scale(const Matrix& q) {
  double s = q.diagonal().cwiseAbs().maxCoeff();
  return s > 0.0 ? s : std::max(q.cwiseAbs().maxCoeff(), 1.0);
}

// Real vectors: positive entry sum, or first significant entry positive when
// the sum vanishes. Complex vectors: largest entry rotated onto the positive
// real axis.
Complex canonical_phase(const CVector& v) {
  const double norm = v.norm();
  if (norm == 0.0) return 1.0;
  if (v.imag().cwiseAbs().maxCoeff() <= 1e-14 * norm) {
    double sum = v.real().sum();
    if (std::abs(sum) > 1e-10 * norm) return sum > 0 ? 1.0 : -1.0;
    for (Index i = 0; i < v.size(); ++i)
      if (std::abs(v(i).real()) > 1e-8 * norm) return v(i).real() > 0 ? 1.0 : -1.0;
    return 1.0;
  }
  Index best = 0;
  double mag = -1.0;
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > mag * (1.0 + 1e-12)) {
      mag = std::abs(v(i));
      best = i;
    }
  return std::conj(v(best)) / std::abs(v(best));
}

double condition_number(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

Vector null_vector(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  Vector v = svd.matrixV().col(m.cols() - 1);
  if (v.sum() < 0.0) v = -v;
  return v;
}

}  // namespace

CMatrix SpectralDecomposition::reconstruct() const {
  return right * eigenvalues.asDiagonal() * left;
}

bool SpectralDecomposition::real_spectrum(double tol) const {
  return eigenvalues.imag().cwiseAbs().maxCoeff() <= tol;
}

void SpectralDecomposition::align_to(const CMatrix& reference) {
  if (reference.rows() != right.rows() || reference.cols() != right.cols())
    throw Error(Errc::DimensionMismatch, "reference basis has the wrong shape");
  for (Index k = 0; k < right.cols(); ++k) {
    Complex p = right.col(k).dot(reference.col(k));  // conj(v) . ref
    if (std::abs(p) == 0.0) continue;
    Complex z = p / std::abs(p);
    right.col(k) *= z;
    left.row(k) /= z;
  }
}

SpectralDecomposition eigendecompose(const Matrix& q, const SpectralOptions& options) {
  if (q.rows() != q.cols()) throw Error(Errc::DimensionMismatch, "matrix must be square");
  const Index n = q.rows();
  SpectralDecomposition d;
  CVector values(n);
  CMatrix vectors(n, n);

  const double scale = diagonal_scale(q);
  d.symmetric = (q - q.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * scale;
  if (d.symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(q);
    values = es.eigenvalues().cast<Complex>();
    vectors = es.eigenvectors().cast<Complex>();
  } else {
    Eigen::EigenSolver<Matrix> es(q);
    if (es.info() != Eigen::Success) throw Error(Errc::Defective, "eigenvalue iteration failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (values(a).real() != values(b).real()) return values(a).real() < values(b).real();
    return values(a).imag() < values(b).imag();
  });

  d.eigenvalues.resize(n);
  d.right.resize(n, n);
  double best_zero = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < n; ++k) {
    Complex q_k = values(order[k]);
    CVector v = vectors.col(order[k]);
    if (d.symmetric || std::abs(q_k.imag()) <= 1e-14 * scale) {
      // Real eigenvalue: a real eigenvector exists; drop round-off phase.
      if (v.imag().cwiseAbs().maxCoeff() > 1e-12 * v.norm()) {
        Index big = 0;
        v.cwiseAbs().maxCoeff(&big);
        v *= std::conj(v(big)) / std::abs(v(big));
      }
      v = v.real().cast<Complex>();
      q_k = Complex(q_k.real(), 0.0);
    }
    v /= v.norm();
    v *= canonical_phase(v);
    if (std::abs(q_k) < options.snap * scale && std::abs(q_k) < best_zero) {
      best_zero = std::abs(q_k);
      d.steady_index = k;
    }
    d.eigenvalues(k) = q_k;
    d.right.col(k) = v;
  }
  if (d.steady_index) d.eigenvalues(*d.steady_index) = 0.0;

  d.condition = condition_number(d.right);
  if (!(d.condition <= options.max_condition)) {
    std::ostringstream msg;
    msg << "eigenvector matrix condition number " << d.condition << " exceeds "
        << options.max_condition;
    throw Error(Errc::Defective, msg.str());
  }
  d.left = d.symmetric ? CMatrix(d.right.adjoint()) : CMatrix(d.right.partialPivLu().inverse());
  return d;
}

Matrix matrix_exponential(const Matrix& q, double t) {
  if (q.rows() != q.cols()) throw Error(Errc::DimensionMismatch, "matrix must be square");
  if (!(t >= 0.0)) throw Error(Errc::BadHorizon, "exponential time must be nonnegative");
  if (t == 0.0) return Matrix::Identity(q.rows(), q.cols());
  Matrix qt = q * t;
  return qt.exp();
}

SteadyStatePair steady_state_vectors(const Matrix& q) {
  if (q.rows() != q.cols()) throw Error(Errc::DimensionMismatch, "matrix must be square");
  const double scale = diagonal_scale(q);
  Eigen::JacobiSVD<Matrix> svd(q);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) > 1e-9 * scale)
    throw Error(Errc::NoZeroEigenvalue, "matrix has no zero eigenvalue (smallest singular value " +
                                            std::to_string(s(s.size() - 1)) + ")");
  SteadyStatePair p;
  p.right = null_vector(q);
  p.left = null_vector(q.transpose());
  p.psi = p.right.sum();
  p.omega = p.left.sum();
  return p;
}

GeneratorReport is_ctmc_generator(const Matrix& q, Protocol protocol, double tol) {
  GeneratorReport r;
  if (q.rows() != q.cols()) {
    r.valid = false;
    r.violations.push_back("matrix is not square");
    return r;
  }
  const Index n = q.rows();
  r.min_off_diagonal = n > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      r.min_off_diagonal = std::min(r.min_off_diagonal, q(i, j));
      if (q(i, j) < -tol) {
        r.valid = false;
        std::ostringstream msg;
        msg << "negative off-diagonal Q(" << i + 1 << "," << j + 1 << ") = " << q(i, j);
        r.violations.push_back(msg.str());
      }
    }
  const bool columns = protocol == Protocol::Conservative;
  Vector sums = columns ? Vector(q.colwise().sum().transpose()) : Vector(q.rowwise().sum());
  for (Index k = 0; k < n; ++k) {
    r.max_sum_residual = std::max(r.max_sum_residual, std::abs(sums(k)));
    if (std::abs(sums(k)) > tol) {
      r.valid = false;
      std::ostringstream msg;
      msg << (columns ? "column " : "row ") << k + 1 << " sums to " << sums(k);
      r.violations.push_back(msg.str());
    }
  }
  return r;
}

bool within_gershgorin_disks(const Matrix& q, const CVector& eigenvalues, double slack) {
  const Index n = q.rows();
  for (Index k = 0; k < eigenvalues.size(); ++k) {
    bool inside = false;
    for (Index i = 0; i < n && !inside; ++i) {
      double radius = q.row(i).cwiseAbs().sum() - std::abs(q(i, i));
      inside = std::abs(eigenvalues(k) - Complex(q(i, i), 0.0)) <= radius + slack * (1.0 + radius);
    }
    if (!inside) return false;
  }
  return true;
}

Matrix real_part_checked(const CMatrix& m, double tol) {
  double residue = m.size() ? m.imag().cwiseAbs().maxCoeff() : 0.0;
  if (residue > tol)
    throw Error(Errc::ImaginaryResidue, "imaginary residue " + std::to_string(residue) + " exceeds tolerance");
  return m.real();
}

Vector real_part_checked(const CVector& v, double tol) {
  return real_part_checked(CMatrix(v), tol).col(0);
}

}  // namespace netdiff
