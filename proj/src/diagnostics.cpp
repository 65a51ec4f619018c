#include "crossdiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crossdiff/linalg.hpp"

namespace crossdiff {

namespace {

constexpr double kValueFloor = 1e-14;  // floors arguments of log / negative powers

double floored(double z) { return z < kValueFloor ? kValueFloor : z; }

}  // namespace

const char* to_string(MonitorStatus status) {
  switch (status) {
    case MonitorStatus::Pass: return "pass";
    case MonitorStatus::Fail: return "fail";
    case MonitorStatus::NotApplicable: return "not_applicable";
  }
  return "unknown";
}

DiagnosticsConfig DiagnosticsConfig::defaults_for(const ParamSet& p) {
  DiagnosticsConfig cfg;
  cfg.entropy_exponents = {0.5, 2.0};
  if (p.beta != 0.5 && p.beta != 2.0 && p.beta != 1.0) {
    cfg.entropy_exponents.push_back(p.beta);
  }
  return cfg;
}

bool DiagnosticsReport::all_pass() const {
  for (const MonitorSeries& s : series) {
    if (s.status == MonitorStatus::Fail) return false;
  }
  if (dual_probe && dual_probe->status == MonitorStatus::Fail) return false;
  return true;
}

const MonitorSeries* DiagnosticsReport::find(const std::string& name) const {
  for (const MonitorSeries& s : series) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

double mass_reaction_constant(double a, double r_u, double r_a) {
  if (!(r_a > 0.0) || !(a > 0.0)) {
    throw std::invalid_argument("mass_reaction_constant requires r_a > 0 and a > 0");
  }
  if (r_u <= 0.0) return 0.0;
  const double z_star = std::pow(2.0 * r_u / (r_a * (1.0 + a)), 1.0 / a);
  return r_u * z_star - 0.5 * r_a * std::pow(z_star, 1.0 + a);
}

double entropy_reaction_constant(double r_u, double r_a, double a) {
  if (!(r_a > 0.0) || !(a > 0.0)) {
    throw std::invalid_argument("entropy_reaction_constant requires r_a > 0 and a > 0");
  }
  if (r_u <= 0.0) return 0.0;
  const double z_star = std::pow(r_u / (r_a * (1.0 + a)), 1.0 / a);
  return 2.0 * z_star * (r_u - r_a * std::pow(z_star, a));
}

double phi_p(double z, double p) {
  const double zf = floored(z);
  if (p == 0.0) return zf - std::log(zf);
  return z - pow_pos(z, p) / p - 1.0 + 1.0 / p;
}

double phi_p_prime(double z, double p) {
  const double zf = floored(z);
  if (p == 0.0) return 1.0 - 1.0 / zf;
  return 1.0 - pow_pos(zf, p - 1.0);
}

double phi_p_second(double z, double p) {
  const double zf = floored(z);
  if (p == 0.0) return 1.0 / (zf * zf);
  return (1.0 - p) * pow_pos(zf, p - 2.0);
}

double phi_log(double z, double mu) {
  return 2.0 * z - std::log(floored(mu + z));
}

double phi_log_second(double z, double mu) {
  const double s = floored(mu + z);
  return 1.0 / (s * s);
}

MonitorSeries check_max_principle(const Trajectory& traj) {
  const ParamSet& p = traj.params;
  MonitorSeries series;
  series.name = "max_v";
  const int n_steps = traj.steps();
  const bool applicable = p.r_c > 0.0;
  double bound = 0.0;
  if (applicable) {
    bound = std::max(traj.states[0].v.max(), std::pow(p.r_v / p.r_c, 1.0 / p.c));
  }
  series.tolerance = applicable ? 1e-12 * (1.0 + bound) : 0.0;
  series.status = applicable ? MonitorStatus::Pass : MonitorStatus::NotApplicable;
  if (!applicable) series.note = "r_c = 0: equilibrium cap undefined";
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n_steps; ++k) {
    const double value = traj.states[static_cast<size_t>(k)].v.max();
    series.step.push_back(k);
    series.time.push_back(k * traj.tau);
    series.value.push_back(value);
    if (applicable) {
      const double margin = value - bound;
      series.bound.push_back(bound);
      series.margin.push_back(margin);
      const bool ok = margin <= series.tolerance;
      series.pass.push_back(ok ? 1 : 0);
      if (!ok) series.status = MonitorStatus::Fail;
      worst = std::max(worst, margin);
    }
  }
  series.worst_margin = applicable && n_steps > 0 ? worst : 0.0;
  return series;
}

MonitorSeries check_mass_estimate(const Trajectory& traj) {
  const ParamSet& p = traj.params;
  const Grid& g = traj.grid;
  MonitorSeries series;
  series.name = "mass_u";
  const bool applicable = p.r_a > 0.0;
  if (!applicable) {
    series.status = MonitorStatus::NotApplicable;
    series.note = "r_a = 0: reaction constant undefined";
    return series;
  }
  const double constant = mass_reaction_constant(p.a, p.r_u, p.r_a);
  const double mass0 = integrate(traj.states[0].u);
  const double volume = g.volume();
  const double h = g.h_max();
  KahanSum cumulative;  // sum_{j<=k} tau * int u_j^{1+a}
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= traj.steps(); ++k) {
    const Field& u = traj.states[static_cast<size_t>(k)].u;
    KahanSum cell;
    for (double val : u.values) cell.add(pow_pos(val, 1.0 + p.a));
    cumulative.add(traj.tau * cell.value() * g.cell_volume());
    const double lhs = integrate(u) + 0.5 * p.r_a * cumulative.value();
    const double rhs = mass0 + volume * (k * traj.tau) * constant;
    const double tol = 1e-8 + 10.0 * (traj.tau + h * h) * rhs;
    const double margin = lhs - rhs;
    series.step.push_back(k);
    series.time.push_back(k * traj.tau);
    series.value.push_back(lhs);
    series.bound.push_back(rhs + tol);
    series.margin.push_back(margin);
    const bool ok = margin <= tol;
    series.pass.push_back(ok ? 1 : 0);
    if (!ok) series.status = MonitorStatus::Fail;
    worst = std::max(worst, margin);
    series.tolerance = tol;  // final-time tolerance, reported
  }
  series.worst_margin = traj.steps() > 0 ? worst : 0.0;
  return series;
}

MonitorSeries duality_series(const Trajectory& traj) {
  const ParamSet& p = traj.params;
  const Grid& g = traj.grid;
  MonitorSeries series;
  series.name = "duality_u";
  KahanSum cumulative;
  for (int k = 1; k <= traj.steps(); ++k) {
    const Field& u = traj.states[static_cast<size_t>(k)].u;
    KahanSum cell;
    for (double val : u.values) {
      cell.add((1.0 + pow_pos(val, p.alpha)) * val * val);
    }
    cumulative.add(traj.tau * cell.value() * g.cell_volume());
    series.step.push_back(k);
    series.time.push_back(k * traj.tau);
    series.value.push_back(cumulative.value());
  }
  series.note = "no asserted bound: constant is non-constructive";
  return series;
}

double duality_functional(const Trajectory& traj) {
  MonitorSeries s = duality_series(traj);
  return s.value.empty() ? 0.0 : s.value.back();
}

namespace {

// int phi''(v) * coeff(cell) * |grad v|^2 using the cell-centered
// gradient-square density.
double weighted_dissipation(const Field& f, const std::vector<double>& weight) {
  const Field gs = grad_sq_density(f);
  KahanSum acc;
  for (int i = 0; i < f.size(); ++i) acc.add(weight[static_cast<size_t>(i)] * gs[i]);
  return acc.value() * f.grid.cell_volume();
}

}  // namespace

MonitorSeries entropy_v_step_check(const Trajectory& traj, double p_exp, double tol) {
  if (!(p_exp >= 0.0) || p_exp >= 1.0) {
    throw std::invalid_argument("entropy_v_step_check requires 0 <= p < 1");
  }
  const ParamSet& p = traj.params;
  const Grid& g = traj.grid;
  MonitorSeries series;
  series.name = "entropy_v_step_p" + std::to_string(p_exp);
  series.tolerance = tol;
  const double vol = g.cell_volume();
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<double> weight(static_cast<size_t>(g.cells()));
  for (int k = 1; k <= traj.steps(); ++k) {
    const Field& vk = traj.states[static_cast<size_t>(k)].v;
    const Field& vk1 = traj.states[static_cast<size_t>(k) - 1].v;
    const Field& uk = traj.states[static_cast<size_t>(k)].u;
    KahanSum delta_phi;
    for (int i = 0; i < g.cells(); ++i) {
      delta_phi.add(phi_p(vk[i], p_exp) - phi_p(vk1[i], p_exp));
    }
    for (int i = 0; i < g.cells(); ++i) {
      weight[static_cast<size_t>(i)] = phi_p_second(vk[i], p_exp) * p.d_v;
    }
    const double dissipation = weighted_dissipation(vk, weight);
    KahanSum reaction;
    for (int i = 0; i < g.cells(); ++i) {
      const double r2v = vk[i] * (p.r_v - p.r_c * pow_pos(vk[i], p.c) -
                                  p.r_d * pow_pos(uk[i], p.d));
      reaction.add(phi_p_prime(vk[i], p_exp) * r2v);
    }
    const double margin = delta_phi.value() * vol + traj.tau * dissipation -
                          traj.tau * reaction.value() * vol;
    series.step.push_back(k);
    series.time.push_back(k * traj.tau);
    series.value.push_back(margin);
    series.bound.push_back(tol);
    series.margin.push_back(margin);
    const bool ok = margin <= tol;
    series.pass.push_back(ok ? 1 : 0);
    if (!ok) series.status = MonitorStatus::Fail;
    worst = std::max(worst, margin);
  }
  series.worst_margin = traj.steps() > 0 ? worst : 0.0;
  return series;
}

MonitorSeries entropy_v_functional(const Trajectory& traj, double p_exp) {
  const Grid& g = traj.grid;
  MonitorSeries series;
  series.name = "entropy_v_functional_p" + std::to_string(p_exp);
  for (int k = 0; k <= traj.steps(); ++k) {
    const Field& vk = traj.states[static_cast<size_t>(k)].v;
    KahanSum acc;
    for (double z : vk.values) acc.add(phi_p(z, p_exp));
    series.step.push_back(k);
    series.time.push_back(k * traj.tau);
    series.value.push_back(acc.value() * g.cell_volume());
  }
  return series;
}

MonitorSeries entropy_v_cumulative(const Trajectory& traj, double p_exp) {
  const Grid& g = traj.grid;
  MonitorSeries series;
  series.name = "entropy_v_dissipation_p" + std::to_string(p_exp);
  KahanSum cumulative;
  for (int k = 1; k <= traj.steps(); ++k) {
    const Field& vk = traj.states[static_cast<size_t>(k)].v;
    Field root(g);
    for (int i = 0; i < g.cells(); ++i) root[i] = pow_pos(vk[i], 0.5 * p_exp);
    cumulative.add(traj.tau * grad_sq_integral(root));
    series.step.push_back(k);
    series.time.push_back(k * traj.tau);
    series.value.push_back(cumulative.value());
  }
  return series;
}

MonitorSeries entropy_u_step_check(const Trajectory& traj, double tol) {
  const ParamSet& p = traj.params;
  const Grid& g = traj.grid;
  MonitorSeries series;
  series.name = "entropy_u_step";
  series.tolerance = tol;
  const bool applicable = p.r_a > 0.0 || p.r_u == 0.0;
  if (!applicable) {
    series.status = MonitorStatus::NotApplicable;
    series.note = "r_a = 0 with r_u > 0: reaction constant unbounded";
    return series;
  }
  const double constant =
      (p.r_a > 0.0) ? entropy_reaction_constant(p.r_u, p.r_a, p.a) : 0.0;
  const double vol = g.cell_volume();
  const double mu = 1.0;
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<double> weight(static_cast<size_t>(g.cells()));
  for (int k = 1; k <= traj.steps(); ++k) {
    const Field& uk = traj.states[static_cast<size_t>(k)].u;
    const Field& uk1 = traj.states[static_cast<size_t>(k) - 1].u;
    const Field& vk = traj.states[static_cast<size_t>(k)].v;
    KahanSum delta_phi;
    for (int i = 0; i < g.cells(); ++i) {
      delta_phi.add(phi_log(uk[i], mu) - phi_log(uk1[i], mu));
    }
    for (int i = 0; i < g.cells(); ++i) {
      const double diff = p.d_u + p.d_alpha * (1.0 + p.alpha) * pow_pos(uk[i], p.alpha) +
                          0.5 * p.d_beta * pow_pos(vk[i], p.beta);
      weight[static_cast<size_t>(i)] = phi_log_second(uk[i], mu) * diff;
    }
    const double dissipation = weighted_dissipation(uk, weight);
    Field v_root(g);
    for (int i = 0; i < g.cells(); ++i) v_root[i] = pow_pos(vk[i], 0.5 * p.beta);
    const double cross = 2.0 * p.d_beta * grad_sq_integral(v_root);
    const double margin = delta_phi.value() * vol + traj.tau * dissipation -
                          traj.tau * cross - traj.tau * g.volume() * constant;
    series.step.push_back(k);
    series.time.push_back(k * traj.tau);
    series.value.push_back(margin);
    series.bound.push_back(tol);
    series.margin.push_back(margin);
    const bool ok = margin <= tol;
    series.pass.push_back(ok ? 1 : 0);
    if (!ok) series.status = MonitorStatus::Fail;
    worst = std::max(worst, margin);
  }
  series.worst_margin = traj.steps() > 0 ? worst : 0.0;
  return series;
}

MonitorSeries entropy_u_functional(const Trajectory& traj) {
  const Grid& g = traj.grid;
  MonitorSeries series;
  series.name = "entropy_u_functional";
  for (int k = 0; k <= traj.steps(); ++k) {
    const Field& uk = traj.states[static_cast<size_t>(k)].u;
    KahanSum acc;
    for (double z : uk.values) acc.add(phi_log(z, 1.0));
    series.step.push_back(k);
    series.time.push_back(k * traj.tau);
    series.value.push_back(acc.value() * g.cell_volume());
  }
  return series;
}

MonitorSeries entropy_u_cumulative(const Trajectory& traj) {
  const ParamSet& p = traj.params;
  const Grid& g = traj.grid;
  MonitorSeries series;
  series.name = "entropy_u_dissipation";
  KahanSum cumulative;
  std::vector<double> weight(static_cast<size_t>(g.cells()));
  for (int k = 1; k <= traj.steps(); ++k) {
    const Field& uk = traj.states[static_cast<size_t>(k)].u;
    for (int i = 0; i < g.cells(); ++i) {
      const double denom = 1.0 + uk[i];
      weight[static_cast<size_t>(i)] =
          (1.0 + pow_pos(uk[i], p.alpha)) / (denom * denom);
    }
    cumulative.add(traj.tau * weighted_dissipation(uk, weight));
    series.step.push_back(k);
    series.time.push_back(k * traj.tau);
    series.value.push_back(cumulative.value());
  }
  return series;
}

std::vector<MonitorSeries> log_entropy_checks(const Trajectory& traj) {
  const Grid& g = traj.grid;
  std::vector<MonitorSeries> out;
  for (int species = 0; species < 2; ++species) {
    MonitorSeries functional;
    MonitorSeries dissipation;
    const char* tag = species == 0 ? "u" : "v";
    functional.name = std::string("log_entropy_functional_") + tag;
    dissipation.name = std::string("log_entropy_dissipation_") + tag;
    KahanSum cumulative;
    bool finite = true;
    double sup = 0.0;
    for (int k = 0; k <= traj.steps(); ++k) {
      const Field& f = species == 0 ? traj.states[static_cast<size_t>(k)].u
                                    : traj.states[static_cast<size_t>(k)].v;
      KahanSum acc;
      Field logf(g);
      for (int i = 0; i < g.cells(); ++i) {
        logf[i] = std::log(floored(f[i]));
        acc.add(std::abs(logf[i]));
      }
      const double value = acc.value() * g.cell_volume();
      sup = std::max(sup, value);
      functional.step.push_back(k);
      functional.time.push_back(k * traj.tau);
      functional.value.push_back(value);
      if (!std::isfinite(value)) finite = false;
      if (k >= 1) {
        const double term = traj.tau * grad_sq_integral(logf);
        if (!(term >= 0.0) || !std::isfinite(term)) finite = false;
        cumulative.add(term);
        dissipation.step.push_back(k);
        dissipation.time.push_back(k * traj.tau);
        dissipation.value.push_back(cumulative.value());
      }
    }
    functional.note = "sup = " + std::to_string(sup);
    functional.status = finite ? MonitorStatus::Pass : MonitorStatus::Fail;
    dissipation.status = functional.status;
    out.push_back(std::move(functional));
    out.push_back(std::move(dissipation));
  }
  return out;
}

DualProbeResult dual_probe(const Trajectory& traj, const DualProbeSpec& spec) {
  const ParamSet& p = traj.params;
  const Grid& g = traj.grid;
  const int n = g.cells();
  const int n_steps = traj.steps();
  const double tau = traj.tau;
  DualProbeResult result;
  result.nu_hats = spec.nu_hats;

  // Upper bound K for the u reaction; defined whenever r_a > 0 (or the
  // reaction is off entirely).
  double reaction_cap = 0.0;
  if (p.r_a > 0.0) {
    if (p.r_u > p.r_a) {
      reaction_cap = p.r_u * std::pow(p.r_u / p.r_a, 2.0 / p.a);
    } else {
      reaction_cap = p.r_u * std::pow(p.r_u / p.r_a, 1.0 / p.a);
    }
  } else if (p.r_u > 0.0) {
    result.status = MonitorStatus::NotApplicable;
    result.note = "r_a = 0 with r_u > 0: reaction cap unbounded";
    return result;
  }

  // Backward implicit sweep from the vanishing terminal condition:
  // (I + tau M (-Lap)) w_{k-1} = w_k - tau f_{k-1}.
  Field w(g, 0.0);
  double min_value = 0.0;
  result.level_time.assign(static_cast<size_t>(n_steps) + 1, 0.0);
  result.level_min.assign(static_cast<size_t>(n_steps) + 1, 0.0);
  result.level_max.assign(static_cast<size_t>(n_steps) + 1, 0.0);
  result.level_time[static_cast<size_t>(n_steps)] = n_steps * tau;
  for (int k = n_steps; k >= 1; --k) {
    const State& s = traj.states[static_cast<size_t>(k) - 1];
    const double t = (k - 1) * tau;
    std::vector<double> m_coef(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      m_coef[static_cast<size_t>(i)] = p.d_u + p.d_alpha * pow_pos(s.u[i], p.alpha) +
                                       p.d_beta * pow_pos(s.v[i], p.beta);
    }
    std::vector<double> rhs(static_cast<size_t>(n));
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const int idx = g.index(i, j);
        rhs[static_cast<size_t>(idx)] = w[idx] - tau * spec.forcing(t, g.x(i), g.y(j));
      }
    }
    auto edge_pairs = [&](auto&& add) {
      if (g.dim == 1) {
        const double sx = 1.0 / (g.hx * g.hx);
        for (int i = 0; i < n; ++i) {
          if (i > 0) add(i, i - 1, sx);
          if (i + 1 < n) add(i, i + 1, sx);
        }
      } else {
        const double sx = 1.0 / (g.hx * g.hx);
        const double sy = 1.0 / (g.hy * g.hy);
        for (int j = 0; j < g.ny; ++j) {
          for (int i = 0; i < g.nx; ++i) {
            const int idx = g.index(i, j);
            if (i > 0) add(idx, idx - 1, sx);
            if (i + 1 < g.nx) add(idx, idx + 1, sx);
            if (j > 0) add(idx, idx - g.nx, sy);
            if (j + 1 < g.ny) add(idx, idx + g.nx, sy);
          }
        }
      }
    };
    if (g.dim == 1) {
      BandedMatrix mat(n, 1, 1);
      for (int i = 0; i < n; ++i) mat.add(i, i, 1.0);
      edge_pairs([&](int i, int j, double sc) {
        const double c = tau * m_coef[static_cast<size_t>(i)] * sc;
        mat.add(i, i, c);
        mat.add(i, j, -c);
      });
      mat.solve(rhs);
    } else {
      std::vector<std::vector<int>> cols(static_cast<size_t>(n));
      for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
          const int idx = g.index(i, j);
          auto& c = cols[static_cast<size_t>(idx)];
          c.push_back(idx);
          if (i > 0) c.push_back(idx - 1);
          if (i + 1 < g.nx) c.push_back(idx + 1);
          if (j > 0) c.push_back(idx - g.nx);
          if (j + 1 < g.ny) c.push_back(idx + g.nx);
          std::sort(c.begin(), c.end());
        }
      }
      CsrMatrix mat = CsrMatrix::from_pattern(cols);
      for (int i = 0; i < n; ++i) mat.add(i, i, 1.0);
      edge_pairs([&](int i, int j, double sc) {
        const double c = tau * m_coef[static_cast<size_t>(i)] * sc;
        mat.add(i, i, c);
        mat.add(i, j, -c);
      });
      Ilu0 precond = Ilu0::factor(mat);
      std::vector<double> x(static_cast<size_t>(n), 0.0);
      gmres_solve(mat, precond, rhs, x, 1e-12, 60, std::max(2000, 20 * n));
      rhs = x;
    }
    for (int i = 0; i < n; ++i) w[i] = rhs[static_cast<size_t>(i)];
    min_value = std::min(min_value, w.min());
    result.level_time[static_cast<size_t>(k) - 1] = t;
    result.level_min[static_cast<size_t>(k) - 1] = w.min();
    result.level_max[static_cast<size_t>(k) - 1] = w.max();
  }
  result.min_value = min_value;
  if (min_value < -1e-12) {
    result.status = MonitorStatus::Fail;
    result.note = "backward solution dipped below -1e-12";
  }

  // Duality pairing against the trajectory.
  KahanSum numerator;
  std::vector<KahanSum> denom(spec.nu_hats.size());
  for (int k = 1; k <= n_steps; ++k) {
    const Field& u = traj.states[static_cast<size_t>(k)].u;
    const double t = k * tau;
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const double f_val = spec.forcing(t, g.x(i), g.y(j));
        numerator.add(tau * u[g.index(i, j)] * (-f_val) * g.cell_volume());
        for (size_t q = 0; q < spec.nu_hats.size(); ++q) {
          denom[q].add(tau * std::pow(std::abs(f_val), 2.0 - spec.nu_hats[q]) *
                       g.cell_volume());
        }
      }
    }
  }
  KahanSum u0_sq;
  for (double val : traj.states[0].u.values) u0_sq.add(val * val);
  const double u0_l2 = std::sqrt(std::max(0.0, u0_sq.value() * g.cell_volume()));
  for (size_t q = 0; q < spec.nu_hats.size(); ++q) {
    const double exponent = 2.0 - spec.nu_hats[q];
    const double f_norm = std::pow(denom[q].value(), 1.0 / exponent);
    const double scale = (u0_l2 + reaction_cap) * f_norm;
    result.ratios.push_back(scale > 0.0 ? numerator.value() / scale : 0.0);
  }
  return result;
}

namespace {

// Componentwise second derivatives with mirrored indices, matching the
// zero-flux extension of cell-centered data.
int mirror(int i, int n) {
  if (i < 0) return -i - 1;
  if (i >= n) return 2 * n - 1 - i;
  return i;
}

double hessian_sq(const Field& f, int i, int j) {
  const Grid& g = f.grid;
  if (g.dim == 1) {
    const double vxx = (f[mirror(i + 1, g.nx)] - 2.0 * f[i] + f[mirror(i - 1, g.nx)]) /
                       (g.hx * g.hx);
    return vxx * vxx;
  }
  auto at = [&](int ii, int jj) { return f[g.index(mirror(ii, g.nx), mirror(jj, g.ny))]; };
  const double vxx = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (g.hx * g.hx);
  const double vyy = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (g.hy * g.hy);
  const double vxy = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) +
                      at(i - 1, j - 1)) /
                     (4.0 * g.hx * g.hy);
  return vxx * vxx + 2.0 * vxy * vxy + vyy * vyy;
}

}  // namespace

RegularityNorms regularity_norms(const Trajectory& traj, double q) {
  const Grid& g = traj.grid;
  RegularityNorms out;
  out.q = q;
  out.gamma_zero = (traj.params.gamma == 0.0);
  KahanSum dt_acc, hess_acc, grad_acc;
  for (int k = 1; k <= traj.steps(); ++k) {
    const Field& vk = traj.states[static_cast<size_t>(k)].v;
    const Field& vk1 = traj.states[static_cast<size_t>(k) - 1].v;
    KahanSum dt_cell, hess_cell, grad_cell;
    const Field gs = grad_sq_density(vk);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const int idx = g.index(i, j);
        dt_cell.add(std::pow(std::abs((vk[idx] - vk1[idx]) / traj.tau), q));
        hess_cell.add(std::pow(hessian_sq(vk, i, j), 0.5 * q));
        grad_cell.add(std::pow(gs[idx], q));
      }
    }
    dt_acc.add(traj.tau * dt_cell.value() * g.cell_volume());
    hess_acc.add(traj.tau * hess_cell.value() * g.cell_volume());
    grad_acc.add(traj.tau * grad_cell.value() * g.cell_volume());
  }
  out.time_derivative_norm = std::pow(dt_acc.value(), 1.0 / q);
  out.hessian_norm = std::pow(hess_acc.value(), 1.0 / q);
  out.gradient_norm = std::pow(grad_acc.value(), 1.0 / (2.0 * q));
  return out;
}

DiagnosticsReport run_diagnostics(const Trajectory& traj, const DiagnosticsConfig& cfg) {
  for (double p : cfg.entropy_exponents) {
    if (!(p > 0.0) || p == 1.0) {
      throw std::invalid_argument("entropy exponents must be positive and != 1");
    }
  }
  DiagnosticsReport report;
  const double tol = cfg.step_tolerance(traj.grid);
  report.series.push_back(check_max_principle(traj));
  report.series.push_back(check_mass_estimate(traj));
  report.series.push_back(duality_series(traj));
  report.series.push_back(entropy_v_step_check(traj, 0.0, tol));
  for (double p : cfg.entropy_exponents) {
    if (p < 1.0) {
      report.series.push_back(entropy_v_step_check(traj, p, tol));
    }
    report.series.push_back(entropy_v_functional(traj, p));
    report.series.push_back(entropy_v_cumulative(traj, p));
  }
  report.series.push_back(entropy_u_step_check(traj, tol));
  report.series.push_back(entropy_u_functional(traj));
  report.series.push_back(entropy_u_cumulative(traj));
  if (cfg.include_log_entropies) {
    for (MonitorSeries& s : log_entropy_checks(traj)) {
      report.series.push_back(std::move(s));
    }
  }
  if (cfg.dual_probe) {
    report.dual_probe = dual_probe(traj, *cfg.dual_probe);
  }
  for (double q : cfg.regularity_exponents) {
    report.regularity.push_back(regularity_norms(traj, q));
  }
  return report;
}

}  // namespace crossdiff
