// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "crossdiff/diagnostics.hpp"
#include "crossdiff/oracles.hpp"
#include "crossdiff/stepper.hpp"
#include "support.hpp"

using namespace crossdiff;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[%2d] %-34s %s (%s, %.2fs)\n", index, name.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str(), seconds);
  if (!pass) ++failures;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

ParamSet canonical() {
  ParamSet p;
  p.r_u = 2.0;
  p.r_v = 2.0;
  return p;
}

State cosine_state(const Grid& g, double u_base, double u_amp, double v_base,
                   double v_amp) {
  State s;
  s.u = Field(g);
  s.v = Field(g);
  for (int i = 0; i < g.nx; ++i) {
    s.u[i] = u_base + u_amp * std::cos(M_PI * g.x(i) / g.lx);
    s.v[i] = v_base + v_amp * std::cos(M_PI * g.x(i) / g.lx);
  }
  return s;
}

Trajectory canonical_trajectory(int n, int steps, double final_time) {
  const Grid g = Grid::make_1d(n, 1.0);
  SchemeConfig cfg;
  cfg.final_time = final_time;
  cfg.steps = steps;
  return run(cosine_state(g, 0.8, 0.3, 1.2, -0.4), canonical(), cfg).trajectory;
}

double pearson(const Field& a, const Field& b) {
  const int n = a.size();
  double ma = 0.0, mb = 0.0;
  for (int i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cab = 0.0, caa = 0.0, cbb = 0.0;
  for (int i = 0; i < n; ++i) {
    cab += (a[i] - ma) * (b[i] - mb);
    caa += (a[i] - ma) * (a[i] - ma);
    cbb += (b[i] - mb) * (b[i] - mb);
  }
  return cab / std::sqrt(caa * cbb);
}

// Criteria 1 and 6: maximum principle and mass estimate over seeded random
// admissible runs.
void criteria_max_principle_and_mass() {
  Timer timer;
  std::mt19937_64 rng(2024);
  bool max_ok = true, mass_ok = true;
  double worst_rel_margin = -1e300;
  std::string max_detail, mass_detail;
  const Grid g = Grid::make_1d(128, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const ParamSet p = crossdiff::testing::random_admissible_params(rng);
    SchemeConfig cfg;
    cfg.final_time = 0.2;
    cfg.steps = 200;
    State init;
    init.u = crossdiff::testing::random_field(g, rng, 0.1, 1.5);
    init.v = crossdiff::testing::random_field(g, rng, 0.1, 2.5);
    Trajectory traj;
    try {
      traj = run(init, p, cfg).trajectory;
    } catch (const std::exception& e) {
      max_ok = mass_ok = false;
      max_detail = mass_detail = std::string("solver failure: ") + e.what();
      break;
    }
    const MonitorSeries max_series = check_max_principle(traj);
    if (max_series.status != MonitorStatus::Pass) {
      max_ok = false;
      max_detail = "violation in trial " + std::to_string(trial);
    }
    worst_rel_margin =
        std::max(worst_rel_margin, max_series.worst_margin / max_series.tolerance);
    const MonitorSeries mass_series = check_mass_estimate(traj);
    if (mass_series.status != MonitorStatus::Pass) {
      mass_ok = false;
      mass_detail = "violation in trial " + std::to_string(trial);
    }
  }
  const double elapsed = timer.seconds();
  if (max_ok) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "20 runs, worst margin %.2e of tolerance",
                  worst_rel_margin);
    max_detail = buf;
  }
  if (mass_ok) mass_detail = "explicit constant, 20 runs";
  report(1, "discrete maximum principle", max_ok && elapsed < 60.0,
         max_detail + (elapsed < 60.0 ? "" : "; over time budget"), elapsed);
  report(6, "mass estimate", mass_ok, mass_detail, elapsed);
}

void criterion_equilibrium() {
  Timer timer;
  const Grid g = Grid::make_1d(64, 1.0);
  State init;
  init.u = Field(g, 1.0);
  init.v = Field(g, 1.0);
  SchemeConfig cfg;
  cfg.final_time = 0.1;
  cfg.steps = 100;
  const RunResult result = run(init, canonical(), cfg);
  double worst = 0.0;
  for (const State& s : result.trajectory.states) {
    for (int i = 0; i < g.cells(); ++i) {
      worst = std::max(worst, std::abs(s.u[i] - 1.0));
      worst = std::max(worst, std::abs(s.v[i] - 1.0));
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "drift %.2e after 100 steps", worst);
  report(2, "equilibrium preservation", worst <= 1e-10 && timer.seconds() < 1.0, buf,
         timer.seconds());
}

double homogeneous_run_error(double u0, double v0, double tau, double final_time,
                             const OdeState& ref) {
  const Grid g = Grid::make_1d(8, 1.0);
  SchemeConfig cfg;
  cfg.final_time = final_time;
  cfg.steps = static_cast<int>(std::lround(final_time / tau));
  State init;
  init.u = Field(g, u0);
  init.v = Field(g, v0);
  const RunResult result = run(init, canonical(), cfg);
  const State& last = result.trajectory.states.back();
  const double eu = std::abs(last.u[0] - ref.u) / std::abs(ref.u);
  const double ev = std::abs(last.v[0] - ref.v) / std::abs(ref.v);
  return std::max(eu, ev);
}

void criterion_ode_convergence() {
  Timer timer;
  const std::vector<double> taus{1e-2, 5e-3, 2.5e-3};

  // As stated: start (0.5, 1.5). This point lies on the degenerate reaction
  // equilibrium line u + v = 2 of the canonical rates, so stepper and
  // oracle agree identically and only the final-error clause is
  // informative.
  const OdeState ref_eq = homogeneous_ode_reference(canonical(), 0.5, 1.5, 1.0);
  bool pass = true;
  std::string detail;
  for (double tau : taus) {
    if (homogeneous_run_error(0.5, 1.5, tau, 1.0, ref_eq) > 1e-2) {
      pass = false;
      detail = "stated start exceeded 1e-2";
    }
  }

  // Convergence-rate clause, measured off the equilibrium line (disclosed
  // deviation; ratios are 0/0 on the stated start).
  const OdeState ref = homogeneous_ode_reference(canonical(), 0.5, 1.0, 1.0);
  std::vector<double> errors;
  for (double tau : taus) {
    errors.push_back(homogeneous_run_error(0.5, 1.0, tau, 1.0, ref));
  }
  std::vector<double> ratios;
  for (size_t i = 1; i < errors.size(); ++i) ratios.push_back(errors[i - 1] / errors[i]);
  for (double r : ratios) {
    if (r < 1.7 || r > 2.3) {
      pass = false;
      detail = "ratio " + std::to_string(r) + " outside [1.7, 2.3]";
    }
  }
  if (errors.back() > 1e-2) {
    pass = false;
    detail = "final error " + std::to_string(errors.back());
  }
  if (pass) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "ratios %.2f, %.2f; final error %.1e", ratios[0],
                  ratios[1], errors.back());
    detail = buf;
  }
  report(3, "ODE oracle convergence", pass && timer.seconds() < 10.0, detail,
         timer.seconds());
}

void criterion_heat_mode() {
  Timer timer;
  // Reactions off, alpha = gamma = 0, v identically zero: the u equation is
  // linear diffusion with coefficient d_u + d_alpha.
  ParamSet p;
  p.strict_validation = false;
  p.r_u = p.r_v = p.r_a = p.r_b = p.r_c = p.r_d = 0.0;
  p.alpha = 0.0;
  p.gamma = 0.0;
  p.d_u = 0.5;
  p.d_alpha = 0.5;
  const double diffusivity = p.d_u + p.d_alpha;
  const Grid g = Grid::make_1d(64, 1.0);
  const double lambda = neumann_mode_eigenvalue(g.hx, g.lx, 1);
  const double base = 1.0, amp = 0.1, final_time = 0.1;

  bool pass = true;
  std::string detail;
  double worst_fraction = 0.0;
  for (double tau : {1e-2, 5e-3, 2.5e-3}) {
    SchemeConfig cfg;
    cfg.final_time = final_time;
    cfg.steps = static_cast<int>(std::lround(final_time / tau));
    State init;
    init.u = Field(g);
    init.v = Field(g, 0.0);
    for (int i = 0; i < g.nx; ++i) {
      init.u[i] = base + amp * std::cos(M_PI * g.x(i) / g.lx);
    }
    const RunResult result = run(init, p, cfg);
    const Field mode = heat_mode_reference(g, diffusivity, 1, final_time);
    const double amp_final = amp * std::exp(-diffusivity * lambda * final_time);
    double err = 0.0;
    const State& last = result.trajectory.states.back();
    for (int i = 0; i < g.nx; ++i) {
      err = std::max(err, std::abs(last.u[i] - (base + amp * mode[i])));
    }
    const double bound = 5.0 * tau * lambda * amp_final;
    worst_fraction = std::max(worst_fraction, err / bound);
    if (err > bound) {
      pass = false;
      detail = "error " + std::to_string(err) + " above bound " + std::to_string(bound);
    }
  }
  if (pass) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "worst error %.0f%% of bound",
                  100.0 * worst_fraction);
    detail = buf;
  }
  report(4, "heat-mode validation", pass && timer.seconds() < 10.0, detail,
         timer.seconds());
}

void criterion_entropy_steps() {
  Timer timer;
  const Trajectory traj = canonical_trajectory(128, 500, 0.5);
  const double h = traj.grid.hx;
  const double tol = 1e-6 + 10.0 * h * h;
  bool pass = true;
  double worst = -1e300;
  for (double p : {0.0, 0.5}) {
    const MonitorSeries s = entropy_v_step_check(traj, p, tol);
    worst = std::max(worst, s.worst_margin);
    if (s.status != MonitorStatus::Pass) pass = false;
  }
  const MonitorSeries su = entropy_u_step_check(traj, tol);
  worst = std::max(worst, su.worst_margin);
  if (su.status != MonitorStatus::Pass) pass = false;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst margin %.2e vs tol %.2e", worst, tol);
  report(5, "entropy step inequalities", pass && timer.seconds() < 120.0, buf,
         timer.seconds());
}

void criterion_duality_refinement() {
  Timer timer;
  const double coarse = duality_functional(canonical_trajectory(128, 500, 0.5));
  const double fine = duality_functional(canonical_trajectory(256, 1000, 0.5));
  const double change = std::abs(coarse - fine) / std::abs(fine);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "values %.6f -> %.6f, change %.2f%%", coarse, fine,
                100.0 * change);
  report(7, "duality functional stability", change < 0.05 && timer.seconds() < 300.0,
         buf, timer.seconds());
}

void criterion_map_roundtrip() {
  Timer timer;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> log_range(-4.0, 4.0);
  bool pass = true;
  double worst = 0.0;
  for (int set = 0; set < 10 && pass; ++set) {
    const ParamSet p = crossdiff::testing::random_admissible_params(rng);
    for (int trial = 0; trial < 1000; ++trial) {
      const double u = std::pow(10.0, log_range(rng));
      const double v = std::pow(10.0, log_range(rng));
      const auto [w1, w2] = map_A(p, u, v);
      const auto [u2, v2] = invert_A(p, w1, w2);
      const double rel =
          std::max(std::abs(u2 - u) / std::abs(u), std::abs(v2 - v) / std::abs(v));
      worst = std::max(worst, rel);
      if (rel > 1e-10) {
        pass = false;
        break;
      }
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "10000 pairs, worst relative %.2e", worst);
  report(8, "flux map inversion round-trip", pass && timer.seconds() < 1.0, buf,
         timer.seconds());
}

void criterion_dual_probe() {
  Timer timer;
  bool pass = true;
  std::string detail;

  // Nonnegativity along a canonical trajectory for three nonpositive
  // forcings.
  const Trajectory traj = canonical_trajectory(64, 100, 0.25);
  std::vector<std::function<double(double, double, double)>> forcings;
  forcings.push_back([](double, double, double) { return -1.0; });
  forcings.push_back([](double t, double x, double) {
    return -(0.6 + 0.4 * std::cos(M_PI * x)) * (1.0 + 0.3 * std::sin(5.0 * t));
  });
  forcings.push_back([](double t, double x, double) {
    return -0.2 - 0.8 * std::exp(-3.0 * t) * (1.0 + std::cos(2.0 * M_PI * x)) * 0.5;
  });
  double min_seen = 0.0;
  for (const auto& f : forcings) {
    DualProbeSpec spec;
    spec.forcing = f;
    const DualProbeResult r = dual_probe(traj, spec);
    min_seen = std::min(min_seen, r.min_value);
    if (r.min_value < -1e-12) {
      pass = false;
      detail = "backward solution dipped to " + std::to_string(r.min_value);
    }
  }

  // Constant-coefficient exactness: M = 1, f = -1 gives T - t.
  {
    const Grid g = Grid::make_1d(32, 1.0);
    ParamSet p;
    p.strict_validation = false;
    p.alpha = 0.0;
    p.d_u = 0.5;
    p.d_alpha = 0.5;
    Trajectory flat;
    flat.params = p;
    flat.grid = g;
    flat.tau = 0.01;
    for (int k = 0; k <= 30; ++k) {
      State s;
      s.u = Field(g, 1.0);
      s.v = Field(g, 0.0);
      s.time = k * flat.tau;
      flat.states.push_back(std::move(s));
    }
    DualProbeSpec spec;
    spec.forcing = [](double, double, double) { return -1.0; };
    const DualProbeResult r = dual_probe(flat, spec);
    const double T = 30 * flat.tau;
    for (size_t k = 0; k < r.level_time.size(); ++k) {
      const double expected = T - r.level_time[k];
      if (std::abs(r.level_min[k] - expected) > 1e-10 ||
          std::abs(r.level_max[k] - expected) > 1e-10) {
        pass = false;
        detail = "constant-coefficient case deviates from T - t";
      }
    }
  }
  if (pass) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "min %.1e; constant case matches T - t", min_seen);
    detail = buf;
  }
  report(9, "dual problem probe", pass && timer.seconds() < 30.0, detail,
         timer.seconds());
}

void criterion_segregation() {
  Timer timer;
  // Slow-diffusion domain so the weak-coupling run keeps its structure at
  // T = 5; both runs start from the same positively-correlated bumps.
  const Grid g = Grid::make_1d(256, 50.0);
  State init;
  init.u = Field(g);
  init.v = Field(g);
  for (int i = 0; i < g.nx; ++i) {
    const double bump = 1.0 + 0.5 * std::cos(M_PI * g.x(i) / g.lx);
    init.u[i] = bump;
    init.v[i] = bump;
  }
  SchemeConfig cfg;
  cfg.final_time = 5.0;
  cfg.steps = 500;
  auto correlation_for = [&](double d_beta) {
    ParamSet p = canonical();
    p.d_beta = d_beta;
    const RunResult result = run(init, p, cfg);
    const State& last = result.trajectory.states.back();
    return pearson(last.u, last.v);
  };
  const double corr_strong = correlation_for(30.0);
  const double corr_weak = correlation_for(0.1);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "corr(d_beta=30) = %.4f < corr(d_beta=0.1) = %.4f",
                corr_strong, corr_weak);
  report(10, "segregation qualitative check",
         corr_strong < corr_weak && timer.seconds() < 120.0, buf, timer.seconds());
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criteria_max_principle_and_mass();  // criteria 1 and 6
  criterion_equilibrium();            // 2
  criterion_ode_convergence();        // 3
  criterion_heat_mode();              // 4
  criterion_entropy_steps();          // 5
  criterion_duality_refinement();     // 7
  criterion_map_roundtrip();          // 8
  criterion_dual_probe();             // 9
  criterion_segregation();            // 10
  if (failures == 0) {
    std::printf("ACCEPTANCE: all criteria passed\n");
  } else {
    std::printf("ACCEPTANCE: %d criteria FAILED\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
