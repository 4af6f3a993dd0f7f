#include "netdiff/exogenous.hpp"

#include "netdiff/error.hpp"
#include "netdiff/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace netdiff {
namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void require_length(const Vector& v, Index n, const char* what) {
  if (v.size() != n)
    throw Error(Errc::DimensionMismatch, std::string(what) + " has length " + std::to_string(v.size()) +
                                             ", expected " + std::to_string(n));
}

// x(t + dt) for dx/dt = M x + c with c constant, via the block exponential
// exp([[M, c], [0, 0]] dt).
Vector propagate_constant(const Matrix& m, const Vector& x, const Vector& c, double dt) {
  if (dt <= 0.0) return x;
  if (c.isZero(0.0)) return matrix_exponential(m, dt) * x;
  const Index n = m.rows();
  Matrix aug = Matrix::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = m;
  aug.topRightCorner(n, 1) = c;
  Matrix e = matrix_exponential(aug, dt);
  return e.topLeftCorner(n, n) * x + e.topRightCorner(n, 1);
}

Vector propagate_callable(const Matrix& m, const Vector& x, const std::function<Vector(double)>& fn, double a,
                          double b) {
  if (b <= a) return x;
  const Index n = m.rows();
  std::map<double, Vector> memo;
  auto integrand = [&](double tau) -> const Vector& {
    auto it = memo.find(tau);
    if (it != memo.end()) return it->second;
    Vector u = fn(tau);
    require_length(u, n, "callable input");
    return memo.emplace(tau, matrix_exponential(m, b - tau) * u).first->second;
  };
  Vector acc = matrix_exponential(m, b - a) * x;
  for (Index i = 0; i < n; ++i) {
    double err = 0.0;
    acc(i) += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double tau) { return integrand(tau)(i); }, a, b, 15, 1e-9, &err);
  }
  return acc;
}

// Solves dx/dt = M x + U(t) on the sample grid.
Matrix lti_samples(const Matrix& m, const Vector& x0, const InputSignal& u, const std::vector<double>& times) {
  validate_times(times);
  const Index n = m.rows();
  require_length(x0, n, "initial state");
  if (u.dimension() != n)
    throw Error(Errc::DimensionMismatch, "input has dimension " + std::to_string(u.dimension()) + ", expected " +
                                             std::to_string(n));
  Matrix out(static_cast<Index>(times.size()), n);
  Vector x = x0;
  if (const auto* imp = std::get_if<InputSignal::Impulse>(&u.kind())) x += imp->value;
  double now = 0.0;

  auto advance = [&](double target) {
    std::visit(Overloaded{
                   [&](const InputSignal::Constant& c) { x = propagate_constant(m, x, c.value, target - now); },
                   [&](const InputSignal::Impulse&) { x = matrix_exponential(m, target - now) * x; },
                   [&](const InputSignal::Piecewise& p) {
                     double t = now;
                     while (t < target) {
                       auto next = std::upper_bound(p.knots.begin(), p.knots.end(), t);
                       double stop = next == p.knots.end() ? target : std::min(target, *next);
                       x = propagate_constant(m, x, u.value(t), stop - t);
                       t = stop;
                     }
                   },
                   [&](const InputSignal::Callable& c) { x = propagate_callable(m, x, c.fn, now, target); },
               },
               u.kind());
    now = target;
  };

  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] > now) advance(times[k]);
    out.row(static_cast<Index>(k)) = x.transpose();
  }
  return out;
}

double inf_norm(const Matrix& m) { return m.size() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0; }

}  // namespace

InputSignal InputSignal::zero(Index n) { return constant(Vector::Zero(n)); }

InputSignal InputSignal::constant(Vector value) {
  Index n = value.size();
  return InputSignal(Constant{std::move(value)}, n);
}

InputSignal InputSignal::impulse(Vector value) {
  Index n = value.size();
  return InputSignal(Impulse{std::move(value)}, n);
}

InputSignal InputSignal::piecewise(std::vector<double> knots, std::vector<Vector> values) {
  if (knots.empty() || knots.size() != values.size())
    throw Error(Errc::BadParams, "piecewise input needs one value per knot");
  for (std::size_t k = 1; k < knots.size(); ++k)
    if (!(knots[k] > knots[k - 1])) throw Error(Errc::BadParams, "piecewise knots must be strictly ascending");
  Index n = values.front().size();
  for (const auto& v : values)
    if (v.size() != n) throw Error(Errc::DimensionMismatch, "piecewise values differ in length");
  return InputSignal(Piecewise{std::move(knots), std::move(values)}, n);
}

InputSignal InputSignal::callable(std::function<Vector(double)> fn, Index dim) {
  if (!fn || dim < 1) throw Error(Errc::BadParams, "callable input needs a function and a positive dimension");
  return InputSignal(Callable{std::move(fn), dim}, dim);
}

Vector InputSignal::value(double t) const {
  return std::visit(Overloaded{
                        [](const Constant& c) -> Vector { return c.value; },
                        [this](const Impulse&) -> Vector { return Vector::Zero(dim_); },
                        [&](const Piecewise& p) -> Vector {
                          auto it = std::upper_bound(p.knots.begin(), p.knots.end(), t);
                          if (it == p.knots.begin()) return Vector::Zero(dim_);
                          return p.values[static_cast<std::size_t>(it - p.knots.begin()) - 1];
                        },
                        [&](const Callable& c) -> Vector { return c.fn(t); },
                    },
                    kind_);
}

InputSignal InputSignal::mapped(const Matrix& g) const {
  if (g.cols() != dim_) throw Error(Errc::DimensionMismatch, "input map has the wrong number of columns");
  return std::visit(Overloaded{
                        [&](const Constant& c) { return constant(g * c.value); },
                        [&](const Impulse& i) { return impulse(g * i.value); },
                        [&](const Piecewise& p) {
                          std::vector<Vector> v;
                          for (const auto& x : p.values) v.push_back(g * x);
                          return piecewise(p.knots, std::move(v));
                        },
                        [&](const Callable& c) {
                          auto fn = c.fn;
                          return callable([fn, g](double t) -> Vector { return g * fn(t); }, g.rows());
                        },
                    },
                    kind_);
}

InputSignal InputSignal::scaled(double factor) const {
  return mapped(factor * Matrix::Identity(dim_, dim_));
}

Trajectory inhomogeneous_trajectory(const Matrix& q, const Vector& s0, const InputSignal& input,
                                    const std::vector<double>& times) {
  if (q.rows() != q.cols()) throw Error(Errc::DimensionMismatch, "rate matrix must be square");
  Trajectory t;
  t.times = times;
  t.values = lti_samples(q, s0, input, times);
  t.source = TrajectorySource::Inhomogeneous;
  return t;
}

DriftReport constant_input_drift(const Matrix& q, const Vector& b, double tol) {
  require_length(b, q.rows(), "input");
  DriftReport r;
  r.rate = Vector::Zero(q.rows());
  Eigen::JacobiSVD<Matrix> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double scale = std::max(s(0), 1e-300);
  if (s(s.size() - 1) > tol * scale) return r;
  Vector vr = svd.matrixV().col(q.cols() - 1);
  Vector vl = svd.matrixU().col(q.rows() - 1);
  const double overlap = vl.dot(vr);
  if (std::abs(overlap) < 1e-12) return r;
  r.steady_coefficient = vl.dot(b) / overlap;
  r.rate = r.steady_coefficient * vr;
  r.diverges = r.rate.cwiseAbs().maxCoeff() > tol * std::max(1.0, b.cwiseAbs().maxCoeff());
  return r;
}

Vector ReducedSystem::expand(const Vector& reduced_state) const {
  require_length(reduced_state, static_cast<Index>(free.size()), "reduced state");
  Vector full(full_size);
  for (std::size_t k = 0; k < free.size(); ++k) full(free[k]) = reduced_state(static_cast<Index>(k));
  for (std::size_t k = 0; k < stubborn.size(); ++k) full(stubborn[k]) = anchors(static_cast<Index>(k));
  return full;
}

Vector ReducedSystem::restrict(const Vector& full_state) const {
  require_length(full_state, full_size, "full state");
  Vector r(static_cast<Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) r(static_cast<Index>(k)) = full_state(free[k]);
  return r;
}

ReducedSystem reduce_stubborn(const TransitionRateMatrix& q, const std::vector<Index>& stubborn,
                              const Vector& values) {
  if (q.protocol != Protocol::NonConservative)
    throw Error(Errc::NotNonConservative, "stubborn agents are defined for the non-conservative protocol");
  const Index n = q.size();
  if (stubborn.empty()) throw Error(Errc::EmptyStubborn, "no stubborn agents given");
  require_length(values, static_cast<Index>(stubborn.size()), "stubborn values");
  std::set<Index> set;
  for (Index s : stubborn) {
    if (s < 0 || s >= n) throw Error(Errc::BadIndex, "stubborn agent " + std::to_string(s + 1) + " out of range");
    if (!set.insert(s).second)
      throw Error(Errc::BadParams, "stubborn agent " + std::to_string(s + 1) + " listed twice");
  }
  if (static_cast<Index>(set.size()) == n) throw Error(Errc::AllStubborn, "every agent is stubborn");

  ReducedSystem rs;
  rs.full_size = n;
  rs.stubborn = stubborn;
  rs.anchors = values;
  for (Index i = 0; i < n; ++i)
    if (!set.count(i)) rs.free.push_back(i);
  const auto nf = static_cast<Index>(rs.free.size());
  const auto ns = static_cast<Index>(stubborn.size());
  rs.reduced.resize(nf, nf);
  rs.coupling.resize(nf, ns);
  for (Index r = 0; r < nf; ++r) {
    for (Index c = 0; c < nf; ++c) rs.reduced(r, c) = q.rates(rs.free[r], rs.free[c]);
    for (Index c = 0; c < ns; ++c) rs.coupling(r, c) = q.rates(rs.free[r], stubborn[c]);
  }
  return rs;
}

StubbornCheck check_stubborn_invertibility(const ReducedSystem& rs, const WeightedDigraph& g) {
  if (g.size() != rs.full_size) throw Error(Errc::DimensionMismatch, "graph does not match the reduced system");
  StubbornCheck c;
  std::set<Index> st(rs.stubborn.begin(), rs.stubborn.end());
  std::set<Index> anchored;
  for (const auto& e : g.edges())
    if (!st.count(e.from) && st.count(e.to)) anchored.insert(e.from);
  for (Index f : rs.free)
    if (!anchored.count(f)) c.unanchored.push_back(f);
  c.neighbour_condition = c.unanchored.empty();

  const Matrix& m = rs.reduced;
  c.diagonally_dominant = true;
  for (Index i = 0; i < m.rows(); ++i) {
    double off = m.row(i).cwiseAbs().sum() - std::abs(m(i, i));
    if (!(std::abs(m(i, i)) > off * (1.0 + 1e-12) + 1e-300)) c.diagonally_dominant = false;
  }
  if (m.size() == 0) {
    c.invertible = true;
  } else {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    c.invertible = s(0) > 0.0 && s(s.size() - 1) > 1e-12 * s(0);
  }
  return c;
}

Vector stubborn_steady_state(const ReducedSystem& rs) {
  Eigen::JacobiSVD<Matrix> svd(rs.reduced);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0) || s(s.size() - 1) <= 1e-12 * s(0))
    throw Error(Errc::SingularReduced, "reduced rate matrix is singular");
  return -rs.reduced.fullPivLu().solve(rs.input());
}

Trajectory dynamic_learning_trajectory(const Matrix& q, const LearningGains& gains, const InputSignal& x,
                                       const Vector& s0, const std::vector<double>& times) {
  if (!(gains.measurement_rate > 0.0)) throw Error(Errc::BadParams, "measurement rate must be positive");
  const double beta = gains.p();
  if (!(beta > 0.0)) throw Error(Errc::BadParams, "effective learning gain must be positive");
  Matrix qd = q - beta * Matrix::Identity(q.rows(), q.cols());
  return inhomogeneous_trajectory(qd, s0, x.scaled(beta), times);
}

std::string_view to_string(Stability s) noexcept {
  switch (s) {
    case Stability::BIBOStable: return "BIBOStable";
    case Stability::MarginallyStable: return "MarginallyStable";
    case Stability::Unstable: return "Unstable";
  }
  return "Unknown";
}

Stability bibo_stability(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw Error(Errc::DimensionMismatch, "matrix must be square");
  if (tol < 0.0) tol = 1e-9 * inf_norm(m);
  Eigen::EigenSolver<Matrix> es(m, false);
  CVector ev = es.eigenvalues();
  double max_re = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k < ev.size(); ++k) max_re = std::max(max_re, ev(k).real());
  if (max_re < -tol) return Stability::BIBOStable;
  if (max_re > tol) return Stability::Unstable;

  // Eigenvalues on the imaginary axis must be semisimple for bounded responses.
  const double cluster = std::max(1e-6 * std::max(inf_norm(m), 1.0), 10.0 * tol);
  std::vector<char> used(static_cast<std::size_t>(ev.size()), 0);
  for (Index k = 0; k < ev.size(); ++k) {
    if (used[k] || std::abs(ev(k).real()) > tol) continue;
    Index alg = 0;
    for (Index j = 0; j < ev.size(); ++j)
      if (!used[j] && std::abs(ev(j) - ev(k)) <= cluster) used[j] = 1, ++alg;
    if (alg == 1) continue;
    CMatrix shifted = m.cast<Complex>() - ev(k) * CMatrix::Identity(m.rows(), m.cols());
    Eigen::JacobiSVD<CMatrix> svd(shifted);
    const auto& s = svd.singularValues();
    Index null_dim = 0;
    for (Index j = 0; j < s.size(); ++j) null_dim += s(j) <= cluster * std::max(1.0, s(0));
    if (null_dim < alg) return Stability::Unstable;
  }
  return Stability::MarginallyStable;
}

Matrix pid_companion(const Matrix& q, const LearningGains& gains) {
  const double b2 = gains.d();
  if (std::abs(1.0 + b2) < 1e-12)
    throw Error(Errc::DegenerateLeadingCoefficient, "1 + beta2' vanishes; the PID system is degenerate");
  const Index n = q.rows();
  const double a = 1.0 / (1.0 + b2);
  Matrix id = Matrix::Identity(n, n);
  Matrix c = Matrix::Zero(2 * n, 2 * n);
  c.topRightCorner(n, n) = id;
  c.bottomLeftCorner(n, n) = -gains.i() * a * id;
  c.bottomRightCorner(n, n) = a * (q - gains.p() * id);
  return c;
}

PidResponse pid_expanded_response(const Matrix& q, const LearningGains& gains, const InputSignal& x,
                                  const Vector& s0, const Vector& t0, const std::vector<double>& times) {
  if (q.rows() != q.cols()) throw Error(Errc::DimensionMismatch, "rate matrix must be square");
  if (!(gains.measurement_rate > 0.0)) throw Error(Errc::BadParams, "measurement rate must be positive");
  const Index n = q.rows();
  require_length(s0, n, "initial state");
  require_length(t0, n, "initial integral state");
  if (x.dimension() != n) throw Error(Errc::DimensionMismatch, "reference input has the wrong dimension");
  if (x.is_impulse()) throw Error(Errc::BadConfig, "impulsive references are not supported by the PID system");
  Matrix comp = pid_companion(q, gains);
  const double b1 = gains.p(), b2 = gains.d(), b3 = gains.i();
  const double a = 1.0 / (1.0 + b2);
  Matrix id = Matrix::Identity(n, n);
  Matrix qa = (q - b1 * id) * a;

  Matrix m = Matrix::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = qa;
  m.topRightCorner(n, n) = b3 * id;
  m.bottomLeftCorner(n, n) = -a * id;
  Matrix g(2 * n, n);
  g.topRows(n) = qa * b2 + b1 * id;
  g.bottomRows(n) = a * id;

  const Vector x0 = x.value(0.0);
  Vector z0(2 * n);
  z0.head(n) = (1.0 + b2) * s0 - b2 * x0;
  z0.tail(n) = -t0;

  Matrix ze = lti_samples(m, z0, x.mapped(g), times);
  PidResponse r;
  r.trajectory.times = times;
  r.trajectory.source = TrajectorySource::Inhomogeneous;
  r.trajectory.values.resize(ze.rows(), n);
  for (Index k = 0; k < ze.rows(); ++k) {
    Vector z = ze.row(k).head(n).transpose();
    r.trajectory.values.row(k) = (a * (z + b2 * x.value(times[static_cast<std::size_t>(k)]))).transpose();
  }
  Eigen::EigenSolver<Matrix> es(comp, false);
  r.poles = es.eigenvalues();
  r.stability = bibo_stability(comp);
  return r;
}

}  // namespace netdiff
