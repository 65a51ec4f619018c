#include "crossdiff/stepper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "crossdiff/linalg.hpp"

namespace crossdiff {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 30;
constexpr int kGmresRestart = 60;
constexpr double kGmresTol = 1e-12;

double norm_inf(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double vec_min(const std::vector<double>& x) {
  double m = x.empty() ? 0.0 : x[0];
  for (double v : x) m = std::min(m, v);
  return m;
}

bool all_zero(const Field& f) {
  for (double v : f.values) {
    if (v != 0.0) return false;
  }
  return true;
}

// Per-cell derivatives of the composite fluxes and reactions. Negative
// exponents (beta-1, b-1, d-1 below one) are evaluated at the positivity
// floor; accepted iterates stay above it, so the guard only regularizes
// transient evaluations.
struct CellCoeffs {
  double dw1_du, dw1_dv, dw2_dv;
  double dru_du, dru_dv, drv_du, drv_dv;
};

CellCoeffs jacobian_coeffs(const ParamSet& p, double u, double v, double floor) {
  const double ug = std::max(u, floor);
  const double vg = std::max(v, floor);
  CellCoeffs c;
  c.dw1_du = p.d_u + p.d_alpha * (1.0 + p.alpha) * pow_pos(u, p.alpha) +
             p.d_beta * pow_pos(v, p.beta);
  c.dw1_dv = p.d_beta * p.beta * pow_pos(vg, p.beta - 1.0) * u;
  c.dw2_dv = p.d_v + p.d_gamma * (1.0 + p.gamma) * pow_pos(v, p.gamma);
  c.dru_du = p.r_u - p.r_a * (1.0 + p.a) * pow_pos(u, p.a) - p.r_b * pow_pos(v, p.b);
  c.dru_dv = -p.r_b * p.b * pow_pos(vg, p.b - 1.0) * u;
  c.drv_du = -p.r_d * p.d * pow_pos(ug, p.d - 1.0) * v;
  c.drv_dv = p.r_v - p.r_c * (1.0 + p.c) * pow_pos(v, p.c) - p.r_d * pow_pos(u, p.d);
  return c;
}

enum class Block { Coupled, UOnly, VOnly };

// The nonlinear system of one implicit step, in one of three layouts:
// the stacked coupled unknown (u_i, v_i interleaved per cell), or a single
// species with the other one frozen.
class StepSystem {
 public:
  StepSystem(const ParamSet& p, const Grid& grid, double tau, const Field& u_prev,
             const Field& v_prev, double floor, Block block)
      : p_(p), grid_(grid), tau_(tau), u_prev_(&u_prev), v_prev_(&v_prev),
        floor_(floor), block_(block) {
    if (block_ == Block::Coupled) {
      unknowns_ = 2 * grid.cells();
    } else {
      unknowns_ = grid.cells();
    }
  }

  void set_frozen(const Field* frozen) { frozen_ = frozen; }

  int unknowns() const { return unknowns_; }

  std::vector<double> pack(const Field& u, const Field& v) const {
    std::vector<double> x(static_cast<size_t>(unknowns_));
    const int n = grid_.cells();
    if (block_ == Block::Coupled) {
      for (int i = 0; i < n; ++i) {
        x[static_cast<size_t>(2 * i)] = u[i];
        x[static_cast<size_t>(2 * i + 1)] = v[i];
      }
    } else if (block_ == Block::UOnly) {
      for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = u[i];
    } else {
      for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = v[i];
    }
    return x;
  }

  void unpack(const std::vector<double>& x, Field& u, Field& v) const {
    const int n = grid_.cells();
    if (block_ == Block::Coupled) {
      for (int i = 0; i < n; ++i) {
        u[i] = x[static_cast<size_t>(2 * i)];
        v[i] = x[static_cast<size_t>(2 * i + 1)];
      }
    } else if (block_ == Block::UOnly) {
      for (int i = 0; i < n; ++i) u[i] = x[static_cast<size_t>(i)];
    } else {
      for (int i = 0; i < n; ++i) v[i] = x[static_cast<size_t>(i)];
    }
  }

  void residual(const std::vector<double>& x, std::vector<double>& f) const {
    const int n = grid_.cells();
    f.resize(static_cast<size_t>(unknowns_));
    Field w1(grid_), w2(grid_);
    fill_fields(x);
    for (int i = 0; i < n; ++i) {
      const double u = u_cur_[i];
      const double v = v_cur_[i];
      if (block_ != Block::VOnly) {
        w1[i] = (p_.d_u + p_.d_alpha * pow_pos(u, p_.alpha) +
                 p_.d_beta * pow_pos(v, p_.beta)) * u;
      }
      if (block_ != Block::UOnly) {
        w2[i] = (p_.d_v + p_.d_gamma * pow_pos(v, p_.gamma)) * v;
      }
    }
    Field lap1 = (block_ != Block::VOnly) ? laplacian_neumann(w1) : Field(grid_);
    Field lap2 = (block_ != Block::UOnly) ? laplacian_neumann(w2) : Field(grid_);
    const Field& up = *u_prev_;
    const Field& vp = *v_prev_;
    for (int i = 0; i < n; ++i) {
      const double u = u_cur_[i];
      const double v = v_cur_[i];
      const double fu = (u - up[i]) / tau_ - lap1[i] -
                        u * (p_.r_u - p_.r_a * pow_pos(u, p_.a) - p_.r_b * pow_pos(v, p_.b));
      const double fv = (v - vp[i]) / tau_ - lap2[i] -
                        v * (p_.r_v - p_.r_c * pow_pos(v, p_.c) - p_.r_d * pow_pos(u, p_.d));
      if (block_ == Block::Coupled) {
        f[static_cast<size_t>(2 * i)] = fu;
        f[static_cast<size_t>(2 * i + 1)] = fv;
      } else if (block_ == Block::UOnly) {
        f[static_cast<size_t>(i)] = fu;
      } else {
        f[static_cast<size_t>(i)] = fv;
      }
    }
  }

  // Solves J(x) delta = -f and returns delta.
  std::vector<double> solve_newton_system(const std::vector<double>& x,
                                          const std::vector<double>& f) {
    fill_fields(x);
    compute_coeffs();
    std::vector<double> rhs(f.size());
    for (size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
    if (grid_.dim == 1) {
      const int band = (block_ == Block::Coupled) ? 3 : 1;
      BandedMatrix mat(unknowns_, band, band);
      assemble([&](int i, int j, double v) { mat.add(i, j, v); });
      mat.solve(rhs);
      return rhs;
    }
    if (csr_.n != unknowns_) build_csr_pattern();
    csr_.zero_values();
    assemble([&](int i, int j, double v) { csr_.add(i, j, v); });
    Ilu0 precond = Ilu0::factor(csr_);
    std::vector<double> delta(rhs.size(), 0.0);
    gmres_solve(csr_, precond, rhs, delta, kGmresTol, kGmresRestart,
                std::max(2000, 20 * unknowns_));
    return delta;
  }

 private:
  void fill_fields(const std::vector<double>& x) const {
    const int n = grid_.cells();
    if (u_cur_.size() != static_cast<size_t>(n)) {
      u_cur_.resize(static_cast<size_t>(n));
      v_cur_.resize(static_cast<size_t>(n));
    }
    if (block_ == Block::Coupled) {
      for (int i = 0; i < n; ++i) {
        u_cur_[static_cast<size_t>(i)] = x[static_cast<size_t>(2 * i)];
        v_cur_[static_cast<size_t>(i)] = x[static_cast<size_t>(2 * i + 1)];
      }
    } else if (block_ == Block::UOnly) {
      for (int i = 0; i < n; ++i) {
        u_cur_[static_cast<size_t>(i)] = x[static_cast<size_t>(i)];
        v_cur_[static_cast<size_t>(i)] = (*frozen_)[i];
      }
    } else {
      for (int i = 0; i < n; ++i) {
        u_cur_[static_cast<size_t>(i)] = (*frozen_)[i];
        v_cur_[static_cast<size_t>(i)] = x[static_cast<size_t>(i)];
      }
    }
  }

  void compute_coeffs() {
    const int n = grid_.cells();
    coeffs_.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      coeffs_[static_cast<size_t>(i)] =
          jacobian_coeffs(p_, u_cur_[static_cast<size_t>(i)], v_cur_[static_cast<size_t>(i)], floor_);
    }
  }

  int row_u(int cell) const { return block_ == Block::Coupled ? 2 * cell : cell; }
  int row_v(int cell) const { return block_ == Block::Coupled ? 2 * cell + 1 : cell; }

  template <typename AddFn>
  void assemble(const AddFn& add) {
    const int n = grid_.cells();
    const double inv_tau = 1.0 / tau_;
    // Time derivative and reaction (cell-diagonal blocks).
    for (int i = 0; i < n; ++i) {
      const CellCoeffs& c = coeffs_[static_cast<size_t>(i)];
      if (block_ == Block::Coupled) {
        add(2 * i, 2 * i, inv_tau - c.dru_du);
        add(2 * i, 2 * i + 1, -c.dru_dv);
        add(2 * i + 1, 2 * i + 1, inv_tau - c.drv_dv);
        add(2 * i + 1, 2 * i, -c.drv_du);
      } else if (block_ == Block::UOnly) {
        add(i, i, inv_tau - c.dru_du);
      } else {
        add(i, i, inv_tau - c.drv_dv);
      }
    }
    // Diffusion of the composite fluxes: -Lap[w] differentiates into
    // face-difference contributions weighted by dw/du at each endpoint.
    auto add_edge = [&](int i, int j, double scale) {
      const CellCoeffs& ci = coeffs_[static_cast<size_t>(i)];
      const CellCoeffs& cj = coeffs_[static_cast<size_t>(j)];
      if (block_ != Block::VOnly) {
        add(row_u(i), col_u(i), scale * ci.dw1_du);
        add(row_u(i), col_u(j), -scale * cj.dw1_du);
        if (block_ == Block::Coupled) {
          add(row_u(i), col_v(i), scale * ci.dw1_dv);
          add(row_u(i), col_v(j), -scale * cj.dw1_dv);
        }
      }
      if (block_ != Block::UOnly) {
        add(row_v(i), col_v(i), scale * ci.dw2_dv);
        add(row_v(i), col_v(j), -scale * cj.dw2_dv);
      }
    };
    if (grid_.dim == 1) {
      const double s = 1.0 / (grid_.hx * grid_.hx);
      for (int i = 0; i < n; ++i) {
        if (i > 0) add_edge(i, i - 1, s);
        if (i + 1 < n) add_edge(i, i + 1, s);
      }
    } else {
      const double sx = 1.0 / (grid_.hx * grid_.hx);
      const double sy = 1.0 / (grid_.hy * grid_.hy);
      for (int j = 0; j < grid_.ny; ++j) {
        for (int i = 0; i < grid_.nx; ++i) {
          const int k = grid_.index(i, j);
          if (i > 0) add_edge(k, k - 1, sx);
          if (i + 1 < grid_.nx) add_edge(k, k + 1, sx);
          if (j > 0) add_edge(k, k - grid_.nx, sy);
          if (j + 1 < grid_.ny) add_edge(k, k + grid_.nx, sy);
        }
      }
    }
  }

  int col_u(int cell) const { return block_ == Block::Coupled ? 2 * cell : cell; }
  int col_v(int cell) const { return block_ == Block::Coupled ? 2 * cell + 1 : cell; }

  void build_csr_pattern() {
    const int n = grid_.cells();
    std::vector<std::vector<int>> cols(static_cast<size_t>(unknowns_));
    auto neighbors = [&](int k, std::vector<int>& out) {
      out.clear();
      const int i = k % grid_.nx;
      const int j = k / grid_.nx;
      out.push_back(k);
      if (i > 0) out.push_back(k - 1);
      if (i + 1 < grid_.nx) out.push_back(k + 1);
      if (j > 0) out.push_back(k - grid_.nx);
      if (j + 1 < grid_.ny) out.push_back(k + grid_.nx);
    };
    std::vector<int> nbr;
    for (int k = 0; k < n; ++k) {
      neighbors(k, nbr);
      if (block_ == Block::Coupled) {
        std::vector<int>& cu = cols[static_cast<size_t>(2 * k)];
        std::vector<int>& cv = cols[static_cast<size_t>(2 * k + 1)];
        for (int e : nbr) {
          cu.push_back(2 * e);
          cu.push_back(2 * e + 1);
          cv.push_back(2 * e + 1);
        }
        cv.push_back(2 * k);
        std::sort(cu.begin(), cu.end());
        std::sort(cv.begin(), cv.end());
      } else {
        std::vector<int>& ck = cols[static_cast<size_t>(k)];
        ck = nbr;
        std::sort(ck.begin(), ck.end());
      }
    }
    csr_ = CsrMatrix::from_pattern(cols);
  }

  const ParamSet& p_;
  const Grid& grid_;
  double tau_;
  const Field* u_prev_;
  const Field* v_prev_;
  const Field* frozen_ = nullptr;
  double floor_;
  Block block_;
  int unknowns_;
  mutable std::vector<double> u_cur_, v_cur_;
  std::vector<CellCoeffs> coeffs_;
  CsrMatrix csr_;
};

struct NewtonOutcome {
  std::vector<double> x;
  int iterations = 0;
  double final_residual = 0.0;
  int damping_events = 0;
};

// Damped Newton: full steps backtracked by halving until the iterate stays
// at or above the positivity floor and the residual norm decreases.
NewtonOutcome newton_solve(StepSystem& system, std::vector<double> x,
                           const SchemeConfig& cfg) {
  std::vector<double> f;
  system.residual(x, f);
  double fnorm = norm_inf(f);
  std::vector<double> history{fnorm};
  NewtonOutcome out;
  out.final_residual = fnorm;
  auto tol_at = [&](const std::vector<double>& state) {
    return cfg.newton_tol * (1.0 + norm_inf(state));
  };
  if (fnorm <= tol_at(x)) {
    out.x = std::move(x);
    return out;
  }
  std::vector<double> candidate(x.size());
  std::vector<double> f_candidate;
  for (int iter = 1; iter <= cfg.newton_max_iter; ++iter) {
    const std::vector<double> delta = system.solve_newton_system(x, f);
    double lambda = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings <= kMaxHalvings; ++halvings) {
      for (size_t k = 0; k < x.size(); ++k) candidate[k] = x[k] + lambda * delta[k];
      if (vec_min(candidate) >= cfg.positivity_floor) {
        system.residual(candidate, f_candidate);
        const double fc = norm_inf(f_candidate);
        if (std::isfinite(fc) && fc <= (1.0 - kArmijo * lambda) * fnorm) {
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
      ++out.damping_events;
    }
    if (!accepted) {
      PositivityLoss err("no positive damped Newton iterate found");
      throw err;
    }
    x.swap(candidate);
    f.swap(f_candidate);
    fnorm = norm_inf(f);
    history.push_back(fnorm);
    out.iterations = iter;
    out.final_residual = fnorm;
    if (fnorm <= tol_at(x)) {
      out.x = std::move(x);
      return out;
    }
  }
  throw NewtonDivergence("Newton did not reach tolerance in " +
                             std::to_string(cfg.newton_max_iter) + " iterations",
                         history);
}

Field solve_single_species(const ParamSet& p, const Grid& grid, double tau,
                           const Field& u_prev, const Field& v_prev, const Field& frozen,
                           Block block, const SchemeConfig& cfg, StepReport& report) {
  StepSystem system(p, grid, tau, u_prev, v_prev, cfg.positivity_floor, block);
  system.set_frozen(&frozen);
  Field u_guess = (block == Block::UOnly) ? u_prev : frozen;
  Field v_guess = (block == Block::VOnly) ? v_prev : frozen;
  NewtonOutcome outcome =
      newton_solve(system, system.pack(u_guess, v_guess), cfg);
  report.newton_iterations += outcome.iterations;
  report.final_residual = outcome.final_residual;
  report.damping_events += outcome.damping_events;
  Field u_out = u_prev, v_out = v_prev;
  system.unpack(outcome.x, u_out, v_out);
  return (block == Block::UOnly) ? u_out : v_out;
}

}  // namespace

State initial_lift(const Field& u_in, const Field& v_in, int N) {
  if (N < 1) throw std::invalid_argument("initial_lift needs N >= 1");
  State s;
  s.u = u_in;
  s.v = v_in;
  s.time = 0.0;
  const double lift = 1.0 / N;
  const double cap = static_cast<double>(N);
  for (double& x : s.u.values) x = std::min(x, cap) + lift;
  for (double& x : s.v.values) x += lift;
  return s;
}

std::pair<State, StepReport> step(const State& prev, const ParamSet& p,
                                  const SchemeConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const double tau = cfg.tau();
  if (!(tau * std::max(p.r_u, p.r_v) < 0.5)) {
    throw StepSizeViolation("tau * max(r_u, r_v) must be < 1/2");
  }
  if (!prev.u.all_finite() || !prev.v.all_finite() || prev.u.min() < 0.0 ||
      prev.v.min() < 0.0) {
    throw NegativeInput("step requires nonnegative finite previous state");
  }
  const Grid& grid = prev.u.grid;
  State next;
  next.u = prev.u;
  next.v = prev.v;
  next.time = prev.time + tau;
  StepReport report;

  const bool u_zero = all_zero(prev.u);
  const bool v_zero = all_zero(prev.v);
  if (u_zero && v_zero) {
    // Both species vanish identically; the zero state is stationary.
  } else if (u_zero) {
    next.v = solve_single_species(p, grid, tau, prev.u, prev.v, prev.u, Block::VOnly,
                                  cfg, report);
  } else if (v_zero) {
    next.u = solve_single_species(p, grid, tau, prev.u, prev.v, prev.v, Block::UOnly,
                                  cfg, report);
  } else {
    StepSystem system(p, grid, tau, prev.u, prev.v, cfg.positivity_floor, Block::Coupled);
    try {
      NewtonOutcome outcome = newton_solve(system, system.pack(prev.u, prev.v), cfg);
      report.newton_iterations = outcome.iterations;
      report.final_residual = outcome.final_residual;
      report.damping_events = outcome.damping_events;
      system.unpack(outcome.x, next.u, next.v);
    } catch (const NewtonDivergence&) {
      // Staggered fixed-point fallback: alternate single-species solves,
      // v first (it sees u only through the reaction), until the coupled
      // residual meets the tolerance.
      report.staggered_fallback = true;
      Field u = prev.u;
      Field v = prev.v;
      bool converged = false;
      for (int sweep = 0; sweep < 40 && !converged; ++sweep) {
        v = solve_single_species(p, grid, tau, prev.u, prev.v, u, Block::VOnly, cfg,
                                 report);
        u = solve_single_species(p, grid, tau, prev.u, prev.v, v, Block::UOnly, cfg,
                                 report);
        std::vector<double> x = system.pack(u, v);
        std::vector<double> f;
        system.residual(x, f);
        double fn = 0.0;
        for (double val : f) fn = std::max(fn, std::abs(val));
        report.final_residual = fn;
        double xn = 0.0;
        for (double val : x) xn = std::max(xn, std::abs(val));
        converged = fn <= cfg.newton_tol * (1.0 + xn);
      }
      if (!converged) {
        throw;
      }
      next.u = u;
      next.v = v;
    }
  }

  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(next), report};
}

RunResult run(const State& initial, const ParamSet& p, const SchemeConfig& cfg) {
  validate_params(p);
  RunResult result;
  result.trajectory.tau = cfg.tau();
  result.trajectory.params = p;
  result.trajectory.grid = initial.u.grid;
  result.trajectory.states.reserve(static_cast<size_t>(cfg.steps) + 1);
  State start = initial;
  start.time = 0.0;
  result.trajectory.states.push_back(start);
  result.reports.reserve(static_cast<size_t>(cfg.steps));
  for (int k = 1; k <= cfg.steps; ++k) {
    try {
      auto [state, report] = step(result.trajectory.states.back(), p, cfg);
      state.time = k * cfg.tau();
      result.trajectory.states.push_back(std::move(state));
      result.reports.push_back(report);
    } catch (NewtonDivergence& e) {
      e.step_index = k;
      throw NewtonDivergence("step " + std::to_string(k) + ": " + e.what(),
                             e.residual_history);
    } catch (PositivityLoss& e) {
      e.step_index = k;
      PositivityLoss annotated("step " + std::to_string(k) + ": " + std::string(e.what()));
      annotated.step_index = k;
      throw annotated;
    }
  }
  return result;
}

double weak_residual(const Trajectory& traj, const TestFunction& psi, EquationSide which) {
  const Grid& g = traj.grid;
  const ParamSet& p = traj.params;
  const double tau = traj.tau;
  const int n_steps = traj.steps();
  const double vol = g.cell_volume();
  KahanSum res;

  // Initial-data term: -int psi(0, x) f_0.
  const Field& f0 = (which == EquationSide::U) ? traj.states[0].u : traj.states[0].v;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      res.add(-psi.value(0.0, g.x(i), g.y(j)) * f0[g.index(i, j)] * vol);
    }
  }

  for (int k = 1; k <= n_steps; ++k) {
    const State& s = traj.states[static_cast<size_t>(k)];
    const double tk = k * tau;
    const double t_mid = tk - 0.5 * tau;
    const Field& f = (which == EquationSide::U) ? s.u : s.v;

    // Composite flux and reaction of the requested equation.
    Field w(g);
    Field reac(g);
    for (int idx = 0; idx < g.cells(); ++idx) {
      const double u = s.u[idx];
      const double v = s.v[idx];
      if (which == EquationSide::U) {
        w[idx] = (p.d_u + p.d_alpha * pow_pos(u, p.alpha) + p.d_beta * pow_pos(v, p.beta)) * u;
        reac[idx] = u * (p.r_u - p.r_a * pow_pos(u, p.a) - p.r_b * pow_pos(v, p.b));
      } else {
        w[idx] = (p.d_v + p.d_gamma * pow_pos(v, p.gamma)) * v;
        reac[idx] = v * (p.r_v - p.r_c * pow_pos(v, p.c) - p.r_d * pow_pos(u, p.d));
      }
    }

    // -int (dt psi) f, midpoint-in-time on each interval, and
    // -int psi reac at the level where the scheme holds.
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const int idx = g.index(i, j);
        res.add(-tau * psi.time_derivative(t_mid, g.x(i), g.y(j)) * f[idx] * vol);
        res.add(-tau * psi.value(tk, g.x(i), g.y(j)) * reac[idx] * vol);
      }
    }

    // + int grad psi . grad w, faces against the analytic gradient.
    double gx = 0.0, gy = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i + 1 < g.nx; ++i) {
        psi.gradient(tk, (i + 1) * g.hx, g.y(j), gx, gy);
        const double dw = (w[g.index(i + 1, j)] - w[g.index(i, j)]) / g.hx;
        res.add(tau * gx * dw * vol);
      }
    }
    if (g.dim == 2) {
      for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
          psi.gradient(tk, g.x(i), (j + 1) * g.hy, gx, gy);
          const double dw = (w[g.index(i, j + 1)] - w[g.index(i, j)]) / g.hy;
          res.add(tau * gy * dw * vol);
        }
      }
    }
  }
  return res.value();
}

}  // namespace crossdiff
