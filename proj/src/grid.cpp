#include "crossdiff/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace crossdiff {

Grid Grid::make_1d(int n, double length) {
  if (n < 3) throw std::invalid_argument("grid needs n >= 3 per axis");
  if (!(length > 0.0)) throw std::invalid_argument("grid needs length > 0");
  Grid g;
  g.dim = 1;
  g.nx = n;
  g.ny = 1;
  g.lx = length;
  g.ly = 0.0;
  g.hx = length / n;
  g.hy = 0.0;
  return g;
}

Grid Grid::make_2d(int nx, int ny, double lx, double ly) {
  if (nx < 3 || ny < 3) throw std::invalid_argument("grid needs n >= 3 per axis");
  if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("grid needs length > 0");
  Grid g;
  g.dim = 2;
  g.nx = nx;
  g.ny = ny;
  g.lx = lx;
  g.ly = ly;
  g.hx = lx / nx;
  g.hy = ly / ny;
  return g;
}

double Field::min() const {
  double m = values.empty() ? 0.0 : values[0];
  for (double v : values) m = std::min(m, v);
  return m;
}

double Field::max() const {
  double m = values.empty() ? 0.0 : values[0];
  for (double v : values) m = std::max(m, v);
  return m;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Field laplacian_neumann(const Field& f) {
  const Grid& g = f.grid;
  Field out(g);
  if (g.dim == 1) {
    const int n = g.nx;
    const double inv_h2 = 1.0 / (g.hx * g.hx);
    for (int i = 0; i < n; ++i) {
      // Face fluxes; mirror ghosts make boundary-face differences zero.
      const double right = (i + 1 < n) ? f[i + 1] - f[i] : 0.0;
      const double left = (i > 0) ? f[i] - f[i - 1] : 0.0;
      out[i] = (right - left) * inv_h2;
    }
    return out;
  }
  const int nx = g.nx;
  const int ny = g.ny;
  const double inv_hx2 = 1.0 / (g.hx * g.hx);
  const double inv_hy2 = 1.0 / (g.hy * g.hy);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = g.index(i, j);
      const double fx_r = (i + 1 < nx) ? f[k + 1] - f[k] : 0.0;
      const double fx_l = (i > 0) ? f[k] - f[k - 1] : 0.0;
      const double fy_r = (j + 1 < ny) ? f[k + nx] - f[k] : 0.0;
      const double fy_l = (j > 0) ? f[k] - f[k - nx] : 0.0;
      out[k] = (fx_r - fx_l) * inv_hx2 + (fy_r - fy_l) * inv_hy2;
    }
  }
  return out;
}

double integrate(const Field& f) {
  KahanSum acc;
  for (double v : f.values) acc.add(v);
  return acc.value() * f.grid.cell_volume();
}

double mean_value(const Field& f) { return integrate(f) / f.grid.volume(); }

double grad_sq_integral(const Field& f) {
  const Grid& g = f.grid;
  const double vol = g.cell_volume();
  KahanSum acc;
  if (g.dim == 1) {
    const double inv_h2 = 1.0 / (g.hx * g.hx);
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double d = f[i + 1] - f[i];
      acc.add(d * d * inv_h2);
    }
    return acc.value() * vol;
  }
  const double inv_hx2 = 1.0 / (g.hx * g.hx);
  const double inv_hy2 = 1.0 / (g.hy * g.hy);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double d = f[g.index(i + 1, j)] - f[g.index(i, j)];
      acc.add(d * d * inv_hx2);
    }
  }
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double d = f[g.index(i, j + 1)] - f[g.index(i, j)];
      acc.add(d * d * inv_hy2);
    }
  }
  return acc.value() * vol;
}

Field grad_sq_density(const Field& f) {
  const Grid& g = f.grid;
  Field out(g);
  if (g.dim == 1) {
    const double inv_h2 = 1.0 / (g.hx * g.hx);
    for (int i = 0; i < g.nx; ++i) {
      const double r = (i + 1 < g.nx) ? f[i + 1] - f[i] : 0.0;
      const double l = (i > 0) ? f[i] - f[i - 1] : 0.0;
      out[i] = 0.5 * (r * r + l * l) * inv_h2;
    }
    return out;
  }
  const double inv_hx2 = 1.0 / (g.hx * g.hx);
  const double inv_hy2 = 1.0 / (g.hy * g.hy);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.index(i, j);
      const double xr = (i + 1 < g.nx) ? f[k + 1] - f[k] : 0.0;
      const double xl = (i > 0) ? f[k] - f[k - 1] : 0.0;
      const double yr = (j + 1 < g.ny) ? f[k + g.nx] - f[k] : 0.0;
      const double yl = (j > 0) ? f[k] - f[k - g.nx] : 0.0;
      out[k] = 0.5 * (xr * xr + xl * xl) * inv_hx2 + 0.5 * (yr * yr + yl * yl) * inv_hy2;
    }
  }
  return out;
}

namespace {

void subtract_mean(Field& f) {
  KahanSum acc;
  for (double v : f.values) acc.add(v);
  const double m = acc.value() / f.size();
  for (double& v : f.values) v -= m;
}

Field poisson_1d(const Field& f) {
  const Grid& g = f.grid;
  const int n = g.nx;
  const double h = g.hx;
  Field rhs = f;
  subtract_mean(rhs);
  // Flux elimination: -(q_{i+1/2} - q_{i-1/2})/h = rhs_i with zero
  // boundary fluxes determines the face gradients q by accumulation,
  // then phi by a second accumulation. Direct and exact to roundoff.
  std::vector<double> q(static_cast<size_t>(n - 1), 0.0);
  KahanSum acc;
  for (int i = 0; i + 1 < n; ++i) {
    acc.add(rhs[i]);
    q[static_cast<size_t>(i)] = -h * acc.value();
  }
  Field phi(g);
  phi[0] = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    phi[i + 1] = phi[i] + h * q[static_cast<size_t>(i)];
  }
  subtract_mean(phi);
  return phi;
}

Field poisson_2d(const Field& f) {
  const Grid& g = f.grid;
  const int n = g.cells();
  Field rhs = f;
  subtract_mean(rhs);

  const double norm_f = std::max(f.max_abs(), 1e-300);
  const double tol_inf = 1e-12 * f.max_abs();

  // Diagonal of -laplacian (varies at the boundary).
  std::vector<double> diag(static_cast<size_t>(n));
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double d = 0.0;
      if (i > 0) d += 1.0 / (g.hx * g.hx);
      if (i + 1 < g.nx) d += 1.0 / (g.hx * g.hx);
      if (j > 0) d += 1.0 / (g.hy * g.hy);
      if (j + 1 < g.ny) d += 1.0 / (g.hy * g.hy);
      diag[static_cast<size_t>(g.index(i, j))] = d;
    }
  }

  auto apply = [&](const Field& x) {
    Field y = laplacian_neumann(x);
    for (double& v : y.values) v = -v;
    return y;
  };

  // Jacobi-preconditioned CG on the consistent semidefinite system, with
  // the constant mode deflated by mean subtraction.
  Field phi(g, 0.0);
  Field r = rhs;
  Field z(g);
  auto precondition = [&](const Field& res, Field& out) {
    for (int k = 0; k < n; ++k) out[k] = res[k] / diag[static_cast<size_t>(k)];
    subtract_mean(out);
  };
  precondition(r, z);
  Field p = z;
  double rz = 0.0;
  {
    KahanSum acc;
    for (int k = 0; k < n; ++k) acc.add(r[k] * z[k]);
    rz = acc.value();
  }
  const int max_iter = 200 + 40 * (g.nx + g.ny);
  for (int it = 0; it < max_iter; ++it) {
    if (r.max_abs() <= tol_inf) break;
    Field ap = apply(p);
    double pap = 0.0;
    {
      KahanSum acc;
      for (int k = 0; k < n; ++k) acc.add(p[k] * ap[k]);
      pap = acc.value();
    }
    if (!(pap > 0.0)) {
      throw SolverFailure("poisson_neumann_solve: CG breakdown");
    }
    const double step = rz / pap;
    for (int k = 0; k < n; ++k) {
      phi[k] += step * p[k];
      r[k] -= step * ap[k];
    }
    subtract_mean(r);
    precondition(r, z);
    double rz_new = 0.0;
    {
      KahanSum acc;
      for (int k = 0; k < n; ++k) acc.add(r[k] * z[k]);
      rz_new = acc.value();
    }
    const double ratio = rz_new / rz;
    rz = rz_new;
    for (int k = 0; k < n; ++k) p[k] = z[k] + ratio * p[k];
  }
  if (r.max_abs() > tol_inf && r.max_abs() > 1e-12 * norm_f) {
    throw SolverFailure("poisson_neumann_solve: CG did not reach tolerance");
  }
  subtract_mean(phi);
  return phi;
}

}  // namespace

Field poisson_neumann_solve(const Field& f) {
  if (!f.all_finite()) {
    throw SolverFailure("poisson_neumann_solve: non-finite input");
  }
  return f.grid.dim == 1 ? poisson_1d(f) : poisson_2d(f);
}

double h_minus1_norm(const Field& f) {
  const Field phi = poisson_neumann_solve(f);
  return std::sqrt(std::max(0.0, grad_sq_integral(phi)));
}

}  // namespace crossdiff
