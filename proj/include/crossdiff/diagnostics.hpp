// Monitored functionals along a trajectory: the pointwise bound on v, the
// mass inequality with its explicit reaction constant, the weighted square
// functional of u, per-step entropy inequalities for both species, log
// entropies, the backward dual-problem probe, and the parabolic regularity
// norms reported in the gamma = 0 regime.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crossdiff/stepper.hpp"

namespace crossdiff {

enum class MonitorStatus { Pass, Fail, NotApplicable };
const char* to_string(MonitorStatus status);

// One monitored quantity along the trajectory. `margin` and `bound` are
// empty for purely informational series; `pass` rows accompany margins.
struct MonitorSeries {
  std::string name;
  std::vector<int> step;
  std::vector<double> time;
  std::vector<double> value;
  std::vector<double> bound;
  std::vector<double> margin;
  std::vector<char> pass;
  MonitorStatus status = MonitorStatus::Pass;
  double worst_margin = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct DualProbeSpec {
  // Nonpositive smooth forcing f(t, x, y).
  std::function<double(double t, double x, double y)> forcing;
  std::vector<double> nu_hats{0.0, 0.05, 0.1};
};

struct DualProbeResult {
  double min_value = 0.0;  // infimum of the backward solution over all levels
  std::vector<double> nu_hats;
  std::vector<double> ratios;
  // Backward-solution envelope per time level k = 0..N (terminal level last).
  std::vector<double> level_time;
  std::vector<double> level_min;
  std::vector<double> level_max;
  MonitorStatus status = MonitorStatus::Pass;
  std::string note;
};

struct RegularityNorms {
  double q = 2.0;
  double time_derivative_norm = 0.0;  // discrete L^q of dt v
  double hessian_norm = 0.0;          // discrete L^q of grad^2 v
  double gradient_norm = 0.0;         // discrete L^{2q} of grad v
  bool gamma_zero = false;
};

struct DiagnosticsConfig {
  // Entropy exponents for the v estimates; values in (0, 1) additionally
  // produce per-step inequality checks. Must be positive and != 1; the
  // p = 0 logarithmic case is always included with the step checks.
  std::vector<double> entropy_exponents{0.5, 2.0};
  bool include_log_entropies = true;
  std::optional<DualProbeSpec> dual_probe;
  std::vector<double> regularity_exponents{2.0};
  // Per-step inequality tolerance: offset + scale * h^2. The inequalities
  // are proved at the spatially continuous level; the h^2 allowance covers
  // stencil and quadrature error.
  double step_tol_offset = 1e-6;
  double step_tol_h2_scale = 10.0;

  double step_tolerance(const Grid& g) const {
    const double h = g.h_max();
    return step_tol_offset + step_tol_h2_scale * h * h;
  }

  // Default exponent list {0.5, 2, beta}.
  static DiagnosticsConfig defaults_for(const ParamSet& p);
};

struct DiagnosticsReport {
  std::vector<MonitorSeries> series;
  std::optional<DualProbeResult> dual_probe;
  std::vector<RegularityNorms> regularity;
  bool snapshot_resolution = false;

  bool all_pass() const;
  const MonitorSeries* find(const std::string& name) const;
};

// sup_{z >= 0} (r_u z - (r_a / 2) z^{1+a}); requires r_a > 0.
double mass_reaction_constant(double a, double r_u, double r_a);
// sup_{z >= 0} 2 z (r_u - r_a z^a); requires r_a > 0 (0 when r_u = 0).
double entropy_reaction_constant(double r_u, double r_a, double a);

// phi_p(z) = z - z^p / p - 1 + 1/p for p in (0,1); phi_0(z) = z - log z.
double phi_p(double z, double p);
double phi_p_prime(double z, double p);
double phi_p_second(double z, double p);
// phi(z) = 2 z - log(mu + z) with mu in {0, 1}.
double phi_log(double z, double mu);
double phi_log_second(double z, double mu);

// Individual monitors. All are pure functions of the trajectory.
MonitorSeries check_max_principle(const Trajectory& traj);
MonitorSeries check_mass_estimate(const Trajectory& traj);
MonitorSeries duality_series(const Trajectory& traj);
double duality_functional(const Trajectory& traj);
MonitorSeries entropy_v_step_check(const Trajectory& traj, double p, double tol);
MonitorSeries entropy_v_functional(const Trajectory& traj, double p);
MonitorSeries entropy_v_cumulative(const Trajectory& traj, double p);
MonitorSeries entropy_u_step_check(const Trajectory& traj, double tol);
MonitorSeries entropy_u_functional(const Trajectory& traj);
MonitorSeries entropy_u_cumulative(const Trajectory& traj);
std::vector<MonitorSeries> log_entropy_checks(const Trajectory& traj);
DualProbeResult dual_probe(const Trajectory& traj, const DualProbeSpec& spec);
RegularityNorms regularity_norms(const Trajectory& traj, double q);

DiagnosticsReport run_diagnostics(const Trajectory& traj, const DiagnosticsConfig& cfg);

}  // namespace crossdiff
