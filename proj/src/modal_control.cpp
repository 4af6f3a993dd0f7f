#include "netdiff/modal_control.hpp"

#include "netdiff/error.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace netdiff {
namespace {

void require_length(Index got, Index want, const char* what) {
  if (got != want)
    throw Error(Errc::DimensionMismatch,
                std::string(what) + " has length " + std::to_string(got) + ", expected " + std::to_string(want));
}

double spectrum_scale(const SpectralDecomposition& d) {
  return std::max(1.0, d.eigenvalues.cwiseAbs().maxCoeff());
}

std::vector<const ControllerSpec*> active_controllers(const SpectralDecomposition& d,
                                                      std::span<const ControllerSpec> controllers) {
  std::vector<const ControllerSpec*> out;
  std::set<Index> modes;
  const double scale = spectrum_scale(d);
  for (const auto& c : controllers) {
    if (c.kind == ControllerSpec::Kind::None) continue;
    if (c.mode < 0 || c.mode >= d.size())
      throw Error(Errc::BadIndex, "controller targets mode " + std::to_string(c.mode + 1) + " of " +
                                      std::to_string(d.size()));
    if (!std::isfinite(c.gain)) throw Error(Errc::BadParams, "controller gain must be finite");
    if (!modes.insert(c.mode).second)
      throw Error(Errc::BadParams, "mode " + std::to_string(c.mode + 1) + " has more than one controller");
    if (std::abs(d.eigenvalues(c.mode).imag()) > 1e-12 * scale)
      throw Error(Errc::BadParams, "mode " + std::to_string(c.mode + 1) +
                                       " is complex; a real gain would break conjugate symmetry");
    out.push_back(&c);
  }
  return out;
}

// Closed loop of the input-driven branch of one mode, started from u.
Matrix loop_matrix(double q, const ControllerSpec& c) {
  if (c.kind == ControllerSpec::Kind::Proportional) return Matrix::Constant(1, 1, q - c.gain);
  Matrix m(2, 2);
  m << q, -c.gain, 1.0, 0.0;
  return m;
}

SubsumedQuasiInput::Filter make_filter(double q_y, const ControllerSpec& c) {
  SubsumedQuasiInput::Filter f;
  if (c.kind == ControllerSpec::Kind::Proportional) {
    // G(s) = 1 - K / (s - q_y + K)
    f.a = Matrix::Constant(1, 1, q_y - c.gain);
    f.b = Vector::Ones(1);
    f.c = Vector::Constant(1, -c.gain);
  } else {
    // G(s) = 1 - K / (s^2 - q_y s + K)
    f.a.resize(2, 2);
    f.a << 0.0, 1.0, -c.gain, q_y;
    f.b = Vector::Unit(2, 1);
    f.c = Vector::Unit(2, 0) * -c.gain;
  }
  return f;
}

ModalResponse assemble(const SpectralDecomposition& d, const std::vector<double>& times, CMatrix quasi) {
  ModalResponse r;
  r.nodes.times = times;
  r.nodes.values = real_part_checked(CMatrix(quasi * d.right.transpose()));
  r.quasi = std::move(quasi);
  return r;
}

}  // namespace

CVector to_quasi(const SpectralDecomposition& d, const Vector& x) { return to_quasi(d, CVector(x.cast<Complex>())); }

CVector to_quasi(const SpectralDecomposition& d, const CVector& x) {
  require_length(x.size(), d.size(), "node vector");
  return d.left * x;
}

CVector from_quasi(const SpectralDecomposition& d, const CVector& quasi) {
  require_length(quasi.size(), d.size(), "quasi vector");
  return d.right * quasi;
}

CVector closed_loop_poles(Complex q_y, const ControllerSpec& ctrl) {
  switch (ctrl.kind) {
    case ControllerSpec::Kind::None: return CVector::Constant(1, q_y);
    case ControllerSpec::Kind::Proportional: return CVector::Constant(1, q_y - ctrl.gain);
    case ControllerSpec::Kind::Integral: {
      // roots of s^2 - q_y s + K
      Complex disc = std::sqrt(q_y * q_y - 4.0 * ctrl.gain);
      CVector p(2);
      p << 0.5 * (q_y - disc), 0.5 * (q_y + disc);
      return p;
    }
  }
  return {};
}

ModalResponse controlled_response(const SpectralDecomposition& d, const Vector& impulse,
                                  std::span<const ControllerSpec> controllers, const std::vector<double>& times,
                                  const std::optional<Vector>& s0) {
  validate_times(times);
  const Index n = d.size();
  require_length(impulse.size(), n, "impulse");
  if (s0) require_length(s0->size(), n, "initial state");
  auto active = active_controllers(d, controllers);
  const double scale = spectrum_scale(d);

  bool marginal = false;
  std::vector<const ControllerSpec*> by_mode(static_cast<std::size_t>(n), nullptr);
  for (const auto* c : active) {
    CVector poles = closed_loop_poles(d.eigenvalues(c->mode), *c);
    double max_re = poles.real().maxCoeff();
    if (max_re > 1e-12 * scale)
      throw Error(Errc::UnstableClosedLoop, "closed loop of mode " + std::to_string(c->mode + 1) +
                                                " has a pole with real part " + std::to_string(max_re));
    marginal = marginal || max_re >= -1e-12 * scale;
    by_mode[static_cast<std::size_t>(c->mode)] = c;
  }

  const CVector u = to_quasi(d, impulse);
  const CVector x0 = s0 ? to_quasi(d, *s0) : CVector::Zero(n);
  CMatrix quasi(static_cast<Index>(times.size()), n);
  for (Index i = 0; i < n; ++i) {
    const Complex q = d.eigenvalues(i);
    const ControllerSpec* c = by_mode[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double t = times[k];
      Complex branch;
      if (!c) {
        branch = std::exp(q * t) * u(i);
      } else {
        Matrix e = matrix_exponential(loop_matrix(q.real(), *c), t);
        branch = e(0, 0) * u(i);
      }
      quasi(static_cast<Index>(k), i) = std::exp(q * t) * x0(i) + branch;
    }
  }
  ModalResponse r = assemble(d, times, std::move(quasi));
  r.marginal = marginal;
  return r;
}

ModalResponse controlled_response(const SpectralDecomposition& d, const Vector& impulse, const ControllerSpec& ctrl,
                                  const std::vector<double>& times, const std::optional<Vector>& s0) {
  return controlled_response(d, impulse, std::span<const ControllerSpec>(&ctrl, 1), times, s0);
}

CVector SubsumedQuasiInput::smooth_part(double t) const {
  CVector out = CVector::Zero(impulse.size());
  for (Index i = 0; i < impulse.size(); ++i) {
    const auto& f = filters[static_cast<std::size_t>(i)];
    if (!f) continue;
    double gain = f->c.dot(matrix_exponential(f->a, t) * f->b);
    out(i) = gain * impulse(i);
  }
  return out;
}

SubsumedQuasiInput subsumed_quasi_input(const SpectralDecomposition& d, const CVector& quasi_impulse,
                                        std::span<const ControllerSpec> controllers, SubsumptionScope scope) {
  require_length(quasi_impulse.size(), d.size(), "quasi impulse");
  auto active = active_controllers(d, controllers);
  SubsumedQuasiInput u;
  u.impulse = quasi_impulse;
  u.scope = scope;
  u.filters.assign(static_cast<std::size_t>(d.size()), std::nullopt);
  if (scope == SubsumptionScope::TargetMode) {
    for (const auto* c : active)
      u.filters[static_cast<std::size_t>(c->mode)] = make_filter(d.eigenvalues(c->mode).real(), *c);
  } else if (!active.empty()) {
    if (active.size() > 1)
      throw Error(Errc::BadParams, "all-mode subsumption supports a single controller");
    auto f = make_filter(d.eigenvalues(active.front()->mode).real(), *active.front());
    for (auto& slot : u.filters) slot = f;
  }
  return u;
}

Vector subsumed_node_input(const SpectralDecomposition& d, const SubsumedQuasiInput& u, double t) {
  return real_part_checked(CVector(d.right * u.smooth_part(t)));
}

ModalResponse simulate_subsumed(const SpectralDecomposition& d, const SubsumedQuasiInput& u,
                                const std::vector<double>& times, const std::optional<Vector>& s0) {
  validate_times(times);
  const Index n = d.size();
  require_length(u.impulse.size(), n, "quasi impulse");
  if (s0) require_length(s0->size(), n, "initial state");
  const CVector x0 = s0 ? to_quasi(d, *s0) : CVector::Zero(n);
  CMatrix quasi(static_cast<Index>(times.size()), n);
  for (Index i = 0; i < n; ++i) {
    const Complex q = d.eigenvalues(i);
    const auto& f = u.filters[static_cast<std::size_t>(i)];
    if (!f) {
      for (std::size_t k = 0; k < times.size(); ++k)
        quasi(static_cast<Index>(k), i) = std::exp(q * times[k]) * (x0(i) + u.impulse(i));
      continue;
    }
    // Cascade: filter state w' = A_f w, w(0+) = B_f u~; mode s' = q s + C_f w.
    const Index m = f->a.rows();
    CMatrix cascade = CMatrix::Zero(m + 1, m + 1);
    cascade.topLeftCorner(m, m) = f->a.cast<Complex>();
    cascade.block(m, 0, 1, m) = f->c.transpose().cast<Complex>();
    cascade(m, m) = q;
    CVector init(m + 1);
    init.head(m) = f->b.cast<Complex>() * u.impulse(i);
    init(m) = x0(i) + u.impulse(i);
    for (std::size_t k = 0; k < times.size(); ++k) {
      CMatrix e = (cascade * Complex(times[k], 0.0)).exp();
      quasi(static_cast<Index>(k), i) = e.row(m) * init;
    }
  }
  return assemble(d, times, std::move(quasi));
}

FiedlerAnalysis fiedler_analysis(const WeightedDigraph& g, Index bins) {
  if (bins < 1) throw Error(Errc::BadParams, "histogram needs at least one bin");
  const Index n = g.size();
  if (n < 2) throw Error(Errc::Disconnected, "Fiedler vector needs at least two agents");
  Matrix a = adjacency_matrix(g);
  Matrix w = 0.5 * (a + a.transpose());
  if (!strongly_connected(w)) throw Error(Errc::Disconnected, "graph is not connected");
  Matrix lap = Matrix(w.rowwise().sum().asDiagonal()) - w;
  Eigen::SelfAdjointEigenSolver<Matrix> es(lap);
  const Vector& ev = es.eigenvalues();

  FiedlerAnalysis f;
  f.eigenvalue = ev(1);
  f.degenerate = n > 2 && std::abs(ev(2) - ev(1)) <= 1e-9 * std::max(1.0, std::abs(ev(1)));
  f.vector = es.eigenvectors().col(1);
  Index big = 0;
  double mag = -1.0;
  for (Index i = 0; i < n; ++i)
    if (std::abs(f.vector(i)) > mag * (1.0 + 1e-12)) mag = std::abs(f.vector(i)), big = i;
  if (f.vector(big) < 0.0) f.vector = -f.vector;

  const double mean = f.vector.mean();
  f.variance = (f.vector.array() - mean).square().mean();
  f.stddev = std::sqrt(f.variance);
  std::vector<double> sorted(f.vector.data(), f.vector.data() + n);
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    double pos = p * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  f.range = sorted.back() - sorted.front();
  f.iqr = quantile(0.75) - quantile(0.25);
  f.histogram.assign(static_cast<std::size_t>(bins), 0);
  for (Index b = 0; b <= bins; ++b)
    f.bin_edges.push_back(sorted.front() + f.range * static_cast<double>(b) / static_cast<double>(bins));
  for (double x : sorted) {
    auto b = f.range > 0.0 ? static_cast<Index>((x - sorted.front()) / f.range * static_cast<double>(bins)) : 0;
    ++f.histogram[static_cast<std::size_t>(std::clamp<Index>(b, 0, bins - 1))];
  }
  return f;
}

}  // namespace netdiff
