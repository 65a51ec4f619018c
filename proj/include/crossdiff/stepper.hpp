// Semi-discrete implicit scheme: one fully implicit coupled nonlinear solve
// per time step,
//   (u_k - u_{k-1})/tau - Lap[a1(u_k, v_k) u_k] = u_k r1(u_k, v_k),
//   (v_k - v_{k-1})/tau - Lap[a2(v_k) v_k]      = v_k r2(u_k, v_k),
// with zero-flux boundaries, solved by damped Newton on the stacked
// unknown with an analytic Jacobian.
#pragma once

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crossdiff/grid.hpp"
#include "crossdiff/params.hpp"

namespace crossdiff {

struct StepSizeViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NewtonDivergence : std::runtime_error {
  NewtonDivergence(const std::string& msg, std::vector<double> history)
      : std::runtime_error(msg), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
  int step_index = -1;
};

struct PositivityLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
  int step_index = -1;
};

struct SchemeConfig {
  double final_time = 1.0;  // T
  int steps = 100;          // N; tau = T / N
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  double positivity_floor = 1e-14;

  double tau() const { return final_time / steps; }
};

struct State {
  Field u;
  Field v;
  double time = 0.0;
};

struct StepReport {
  int newton_iterations = 0;
  double final_residual = 0.0;
  int damping_events = 0;
  double wall_time = 0.0;
  bool staggered_fallback = false;
};

struct Trajectory {
  std::vector<State> states;  // k = 0..N, times k * tau
  double tau = 0.0;
  ParamSet params;
  Grid grid;

  int steps() const { return static_cast<int>(states.size()) - 1; }
};

struct RunResult {
  Trajectory trajectory;
  std::vector<StepReport> reports;
};

// Truncation-and-lift of raw initial data: u0 = min(u_in, N) + 1/N,
// v0 = v_in + 1/N; the result is >= 1/N everywhere.
State initial_lift(const Field& u_in, const Field& v_in, int N);

// One implicit step. Requires tau * max(r_u, r_v) < 1/2 and prev >= 0
// (identically-zero species are propagated exactly; see below). The
// accepted state satisfies the scheme cellwise to the Newton tolerance
// and is >= positivity_floor wherever it moved.
//
// A species that is identically zero stays identically zero (its diffusion
// and reaction both vanish), and the remaining equation is solved on its
// own. Otherwise the coupled Newton runs first and a staggered fixed-point
// sweep is kept as a fallback after NewtonDivergence.
std::pair<State, StepReport> step(const State& prev, const ParamSet& p,
                                  const SchemeConfig& cfg);

// Executes N steps from the given initial state. Errors from step() are
// rethrown with the failing step index attached to the message.
RunResult run(const State& initial, const ParamSet& p, const SchemeConfig& cfg);

// Smooth space-time test function, given analytically.
struct TestFunction {
  std::function<double(double t, double x, double y)> value;
  std::function<double(double t, double x, double y)> time_derivative;
  // Writes the spatial gradient at (t, x, y) into (gx, gy); gy ignored in 1D.
  std::function<void(double t, double x, double y, double& gx, double& gy)> gradient;
};

enum class EquationSide { U, V };

// Distributional residual of the weak formulation evaluated along a
// trajectory: time sums against the piecewise-constant interpolant, face
// differences of the composite flux a(U) U against the analytic gradient
// of psi. psi must vanish for t >= T. O(tau + h^2) for smooth psi.
double weak_residual(const Trajectory& traj, const TestFunction& psi, EquationSide which);

}  // namespace crossdiff
