#include "crossdiff/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace crossdiff {

namespace {

struct Rates {
  double du;
  double dv;
};

Rates rhs(const ParamSet& p, double u, double v) {
  Rates r;
  r.du = u * (p.r_u - p.r_a * pow_pos(u, p.a) - p.r_b * pow_pos(v, p.b));
  r.dv = v * (p.r_v - p.r_c * pow_pos(v, p.c) - p.r_d * pow_pos(u, p.d));
  return r;
}

}  // namespace

OdeState homogeneous_ode_reference(const ParamSet& p, double u0, double v0, double T,
                                   long substeps) {
  if (u0 < 0.0 || v0 < 0.0) throw NegativeInput("ODE reference requires nonnegative data");
  if (substeps < 1) throw std::invalid_argument("substeps must be positive");
  const double dt = T / static_cast<double>(substeps);
  double u = u0;
  double v = v0;
  for (long k = 0; k < substeps; ++k) {
    const Rates k1 = rhs(p, u, v);
    const Rates k2 = rhs(p, u + 0.5 * dt * k1.du, v + 0.5 * dt * k1.dv);
    const Rates k3 = rhs(p, u + 0.5 * dt * k2.du, v + 0.5 * dt * k2.dv);
    const Rates k4 = rhs(p, u + dt * k3.du, v + dt * k3.dv);
    u += dt / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
    v += dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  }
  return {u, v, T};
}

double neumann_mode_eigenvalue(double h, double length, int k_mode) {
  if (k_mode == 0) return 0.0;
  const double theta = k_mode * M_PI * h / length;
  return 2.0 / (h * h) * (1.0 - std::cos(theta));
}

Field heat_mode_reference(const Grid& grid, double diffusivity, int k_mode, double T) {
  Field out(grid);
  if (grid.dim == 1) {
    const double lambda = neumann_mode_eigenvalue(grid.hx, grid.lx, k_mode);
    const double amp = std::exp(-diffusivity * lambda * T);
    for (int i = 0; i < grid.nx; ++i) {
      out[i] = std::cos(k_mode * M_PI * grid.x(i) / grid.lx) * amp;
    }
    return out;
  }
  const double lambda = neumann_mode_eigenvalue(grid.hx, grid.lx, k_mode) +
                        neumann_mode_eigenvalue(grid.hy, grid.ly, k_mode);
  const double amp = std::exp(-diffusivity * lambda * T);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      out[grid.index(i, j)] = std::cos(k_mode * M_PI * grid.x(i) / grid.lx) *
                              std::cos(k_mode * M_PI * grid.y(j) / grid.ly) * amp;
    }
  }
  return out;
}

}  // namespace crossdiff
