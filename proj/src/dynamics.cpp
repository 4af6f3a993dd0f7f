#include "netdiff/dynamics.hpp"

#include "netdiff/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace netdiff {
namespace {

void check_square(const Matrix& q, const Vector& s0) {
  if (q.rows() != q.cols()) throw Error(Errc::DimensionMismatch, "rate matrix must be square");
  if (s0.size() != q.rows())
    throw Error(Errc::DimensionMismatch, "initial state has length " + std::to_string(s0.size()) +
                                             ", expected " + std::to_string(q.rows()));
}

}  // namespace

void validate_times(const std::vector<double>& times) {
  if (times.empty()) throw Error(Errc::BadHorizon, "time grid is empty");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || times[k] < 0.0)
      throw Error(Errc::BadHorizon, "sample times must be finite and nonnegative");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw Error(Errc::BadHorizon, "sample times must be strictly ascending");
  }
}

std::vector<double> time_grid(double horizon, Index intervals) {
  if (!(horizon > 0.0) || intervals < 1) throw Error(Errc::BadHorizon, "grid needs horizon > 0 and intervals >= 1");
  std::vector<double> t(static_cast<std::size_t>(intervals) + 1);
  for (Index k = 0; k <= intervals; ++k) t[k] = horizon * static_cast<double>(k) / static_cast<double>(intervals);
  return t;
}

Trajectory expected_trajectory(const Matrix& q, const Vector& s0, const std::vector<double>& times, Route route) {
  check_square(q, s0);
  validate_times(times);
  Trajectory out;
  out.times = times;
  out.values.resize(static_cast<Index>(times.size()), q.rows());

  std::optional<SpectralDecomposition> d;
  if (route != Route::Exponential) {
    try {
      d = eigendecompose(q);
    } catch (const Error& e) {
      if (route == Route::Spectral || e.code() != Errc::Defective) throw;
    }
  }
  if (d) {
    CVector c = d->left * s0.cast<Complex>();
    for (std::size_t k = 0; k < times.size(); ++k) {
      CVector decay = (d->eigenvalues * times[k]).array().exp().matrix();
      CVector s = d->right * decay.cwiseProduct(c);
      out.values.row(static_cast<Index>(k)) = real_part_checked(s).transpose();
    }
  } else {
    for (std::size_t k = 0; k < times.size(); ++k)
      out.values.row(static_cast<Index>(k)) = (matrix_exponential(q, times[k]) * s0).transpose();
  }
  if (times.front() == 0.0) out.values.row(0) = s0.transpose();
  return out;
}

Trajectory expected_trajectory(const TransitionRateMatrix& q, const Vector& s0, const std::vector<double>& times,
                               Route route) {
  Trajectory t = expected_trajectory(q.rates, s0, times, route);
  t.protocol = q.protocol;
  return t;
}

Vector stationary_value_conservative(const TransitionRateMatrix& q, const Vector& s0) {
  check_square(q.rates, s0);
  if (q.protocol != Protocol::Conservative)
    throw Error(Errc::NotConservative, "stationary value requires a conservative (P1) generator");
  if (!strongly_connected(q.rates)) throw Error(Errc::NotStronglyConnected, "graph is not strongly connected");
  SteadyStatePair p = steady_state_vectors(q.rates);
  return (s0.sum() / p.psi) * p.right;
}

double consensus_value(const TransitionRateMatrix& q, const Vector& s0) {
  check_square(q.rates, s0);
  if (q.protocol != Protocol::NonConservative)
    throw Error(Errc::NotNonConservative, "consensus value requires a non-conservative (P2) generator");
  if (!strongly_connected(q.rates)) throw Error(Errc::NotStronglyConnected, "graph is not strongly connected");
  SteadyStatePair p = steady_state_vectors(q.rates);
  return p.left.dot(s0) / p.omega;
}

SwitchingSchedule alternating_schedule(const std::vector<Matrix>& matrices, double period, double horizon) {
  if (matrices.empty() || !(period > 0.0) || !(horizon > 0.0))
    throw Error(Errc::BadHorizon, "alternating schedule needs matrices, period > 0 and horizon > 0");
  SwitchingSchedule s;
  s.horizon = horizon;
  std::size_t k = 0;
  for (double t = 0.0; t < horizon; t = static_cast<double>(k) * period)
    s.segments.push_back({matrices[k % matrices.size()], t}), ++k;
  return s;
}

Trajectory simulate_switching(const SwitchingSchedule& schedule, const Vector& s0, const std::vector<double>& times) {
  const auto& seg = schedule.segments;
  if (seg.empty() || seg.front().start != 0.0)
    throw Error(Errc::BadHorizon, "schedule must start with a segment at t = 0");
  for (std::size_t k = 0; k < seg.size(); ++k) {
    check_square(seg[k].rates, s0);
    if (k > 0 && !(seg[k].start > seg[k - 1].start))
      throw Error(Errc::BadHorizon, "segment start times must be strictly ascending");
  }
  validate_times(times);

  Trajectory out;
  out.times = times;
  out.values.resize(static_cast<Index>(times.size()), s0.size());
  Vector x = s0;
  double now = 0.0;
  std::size_t active = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double target = times[k];
    while (active + 1 < seg.size() && seg[active + 1].start <= target) {
      x = matrix_exponential(seg[active].rates, seg[active + 1].start - now) * x;
      now = seg[active + 1].start;
      ++active;
    }
    if (target > now) x = matrix_exponential(seg[active].rates, target - now) * x;
    now = target;
    out.values.row(static_cast<Index>(k)) = x.transpose();
  }
  return out;
}

bool shares_steady_eigenvector(const Matrix& q1, const Matrix& q2, Protocol /*protocol*/, double tol) {
  if (q1.rows() != q2.rows() || q1.cols() != q2.cols() || q1.rows() != q1.cols())
    throw Error(Errc::DimensionMismatch, "matrices must be square and of equal size");
  auto null_of = [&](const Matrix& q) {
    // Right null space for both protocols: v_Rs under P1, the all-ones vector under P2.
    Eigen::JacobiSVD<Matrix> svd(q, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const Index n = s.size();
    if (n >= 2 && s(n - 2) <= tol * std::max(1.0, s(0)))
      throw Error(Errc::RankDeficient, "rate matrix has rank below n - 1");
    return Vector(svd.matrixV().col(n - 1));
  };
  Vector a = null_of(q1), b = null_of(q2);
  return std::abs(a.dot(b)) >= 1.0 - tol;
}

double ConvergenceBound::operator()(double t) const { return initial_norm * std::exp(q_max * t); }

ConvergenceBound convergence_bound(const Matrix& q, const Vector& delta0) {
  check_square(q, delta0);
  Eigen::EigenSolver<Matrix> es(q, false);
  CVector ev = es.eigenvalues();
  const double scale = std::max(q.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  Index zero = -1;
  for (Index k = 0; k < ev.size(); ++k)
    if (std::abs(ev(k)) < 1e-9 * scale && (zero < 0 || std::abs(ev(k)) < std::abs(ev(zero)))) zero = k;
  if (zero < 0) throw Error(Errc::UnstableSpectrum, "matrix has no zero eigenvalue");
  ConvergenceBound b;
  b.initial_norm = delta0.norm();
  b.q_max = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k < ev.size(); ++k) {
    if (k == zero) continue;
    if (ev(k).real() >= -1e-9 * scale)
      throw Error(Errc::UnstableSpectrum, "a non-steady eigenvalue has nonnegative real part");
    b.q_max = std::max(b.q_max, ev(k).real());
  }
  return b;
}

}  // namespace netdiff
