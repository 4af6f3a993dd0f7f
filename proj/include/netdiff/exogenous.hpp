#pragma once

#include "netdiff/graph.hpp"
#include "netdiff/trajectory.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace netdiff {

/// Exogenous input U(t) of dimension n.
class InputSignal {
 public:
  struct Constant {
    Vector value;
  };
  /// Instantaneous jump S(0+) = S(0) + value; zero afterwards.
  struct Impulse {
    Vector value;
  };
  /// values[k] holds on [knots[k], knots[k+1]); zero before knots[0], last
  /// value held forever.
  struct Piecewise {
    std::vector<double> knots;
    std::vector<Vector> values;
  };
  struct Callable {
    std::function<Vector(double)> fn;
    Index dim = 0;
  };
  using Kind = std::variant<Constant, Impulse, Piecewise, Callable>;

  static InputSignal zero(Index n);
  static InputSignal constant(Vector value);
  static InputSignal impulse(Vector value);
  /// Throws BadParams if knots are not ascending or sizes disagree.
  static InputSignal piecewise(std::vector<double> knots, std::vector<Vector> values);
  static InputSignal callable(std::function<Vector(double)> fn, Index dim);

  Index dimension() const noexcept { return dim_; }
  const Kind& kind() const noexcept { return kind_; }
  bool is_impulse() const noexcept { return std::holds_alternative<Impulse>(kind_); }

  /// Regular (non-impulsive) part of U at time t.
  Vector value(double t) const;
  /// G * U(t), same kind.
  InputSignal mapped(const Matrix& g) const;
  InputSignal scaled(double factor) const;

 private:
  InputSignal(Kind kind, Index dim) : kind_(std::move(kind)), dim_(dim) {}
  Kind kind_;
  Index dim_ = 0;
};

/// S(t) = exp(Qt) S0 + integral_0^t exp(Q(t - tau)) U(tau) dtau. Constant and
/// piecewise inputs are integrated exactly per segment; callables by adaptive
/// Gauss-Kronrod quadrature at 1e-9 relative tolerance. An impulse is applied
/// as a jump, so the sample at t = 0 reports S(0+).
Trajectory inhomogeneous_trajectory(const Matrix& q, const Vector& s0, const InputSignal& input,
                                    const std::vector<double>& times);

/// Growth of the solution under a constant input b on a generator: the
/// steady-mode component of b is never damped and grows linearly.
struct DriftReport {
  bool diverges = false;
  double steady_coefficient = 0.0;  // v_L . b / (v_L . v_R)
  Vector rate;                      // projection of b on the steady mode
};
DriftReport constant_input_drift(const Matrix& q, const Vector& b, double tol = 1e-9);

/// Non-conservative network with a set of stubborn agents eliminated:
/// dS'/dt = Q' S' + B u.
struct ReducedSystem {
  Matrix reduced;   // Q'
  Matrix coupling;  // B
  Vector anchors;   // u
  std::vector<Index> stubborn;
  std::vector<Index> free;
  Index full_size = 0;

  Vector input() const { return coupling * anchors; }
  /// Full-length state with anchors at the stubborn positions.
  Vector expand(const Vector& reduced_state) const;
  Vector restrict(const Vector& full_state) const;
};

/// Throws NotNonConservative, EmptyStubborn, AllStubborn, BadIndex,
/// DimensionMismatch.
ReducedSystem reduce_stubborn(const TransitionRateMatrix& q, const std::vector<Index>& stubborn,
                              const Vector& values);

struct StubbornCheck {
  bool neighbour_condition = false;       // every free node links to a stubborn node
  bool diagonally_dominant = false;   // strict, row-wise
  bool invertible = false;
  std::vector<Index> unanchored;      // free nodes without a stubborn neighbour
};
StubbornCheck check_stubborn_invertibility(const ReducedSystem& rs, const WeightedDigraph& g);

/// -Q'^-1 B u. Throws SingularReduced.
Vector stubborn_steady_state(const ReducedSystem& rs);

/// Raw gains and measurement rate; the effective gain is beta' = beta * rho.
struct LearningGains {
  double proportional = 0.0;
  double derivative = 0.0;
  double integral = 0.0;
  double measurement_rate = 1.0;

  double p() const { return proportional * measurement_rate; }
  double d() const { return derivative * measurement_rate; }
  double i() const { return integral * measurement_rate; }
};

/// dS/dt = (Q - beta' I) S + beta' X(t). Throws BadParams unless beta' > 0.
Trajectory dynamic_learning_trajectory(const Matrix& q, const LearningGains& gains, const InputSignal& x,
                                       const Vector& s0, const std::vector<double>& times);

enum class Stability { BIBOStable, MarginallyStable, Unstable };
std::string_view to_string(Stability s) noexcept;

/// tol < 0 selects 1e-9 * ||M||_inf.
Stability bibo_stability(const Matrix& m, double tol = -1.0);

struct PidResponse {
  Trajectory trajectory;
  CVector poles;
  Stability stability = Stability::Unstable;
};

/// PID-augmented dynamics
///   dT/dt = S,
///   (1 + b2) dS/dt = (Q - b1 I) S - b3 T + b1 X + b2 dX/dt + b3 Y,  dY/dt = X,
/// with Y(0) = 0 and no derivative kick at t = 0 (X(0-) = X(0)). Solved in the
/// coordinates Z = (1 + b2) S - b2 X, E = Y - T, which remove dX/dt.
/// Throws DegenerateLeadingCoefficient if 1 + b2 = 0.
PidResponse pid_expanded_response(const Matrix& q, const LearningGains& gains, const InputSignal& x,
                                  const Vector& s0, const Vector& t0, const std::vector<double>& times);

/// Companion matrix [[0, I], [-b3/(1+b2) I, (Q - b1 I)/(1+b2)]] whose
/// eigenvalues are the roots of det((1+b2) s^2 + (b1 I - Q) s + b3 I).
Matrix pid_companion(const Matrix& q, const LearningGains& gains);

}  // namespace netdiff
