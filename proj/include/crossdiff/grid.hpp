// Uniform cell-centered Cartesian mesh (1D/2D) with a homogeneous-Neumann
// discrete Laplacian (mirror ghost cells), midpoint quadrature, face-based
// gradient energies, and the zero-mean Neumann Poisson solve backing the
// dual-norm evaluation.
#pragma once

#include <stdexcept>
#include <vector>

namespace crossdiff {

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Compensated (Kahan) accumulator. Long telescoping sums in the monitors
// are cancellation-prone, and fixed-order compensated reduction keeps
// results independent of how loops are arranged.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double value) {
    const double y = value - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

struct Grid {
  int dim = 1;
  int nx = 0;
  int ny = 1;       // 1 in 1D
  double lx = 1.0;
  double ly = 1.0;  // unused in 1D
  double hx = 0.0;
  double hy = 0.0;

  static Grid make_1d(int n, double length);
  static Grid make_2d(int nx, int ny, double lx, double ly);

  int cells() const { return nx * ny; }
  double cell_volume() const { return dim == 1 ? hx : hx * hy; }
  double volume() const { return dim == 1 ? lx : lx * ly; }
  double h_max() const { return dim == 1 ? hx : (hx > hy ? hx : hy); }
  double x(int i) const { return (i + 0.5) * hx; }
  double y(int j) const { return (j + 0.5) * hy; }
  int index(int i, int j = 0) const { return j * nx + i; }
  bool same_shape(const Grid& other) const {
    return dim == other.dim && nx == other.nx && ny == other.ny &&
           lx == other.lx && ly == other.ly;
  }
};

// Scalar grid function, one value per cell (cell-centered).
struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0)
      : grid(g), values(static_cast<size_t>(g.cells()), fill) {}

  double& operator[](int k) { return values[static_cast<size_t>(k)]; }
  double operator[](int k) const { return values[static_cast<size_t>(k)]; }
  int size() const { return static_cast<int>(values.size()); }

  double min() const;
  double max() const;
  double max_abs() const;
  bool all_finite() const;
};

// Discrete Laplacian with mirror ghost cells (ghost value = adjacent
// interior value), realizing the zero-flux boundary condition. Symmetric
// negative semidefinite with constant kernel.
Field laplacian_neumann(const Field& f);

// Midpoint-rule integral: sum of cell values times cell volume.
double integrate(const Field& f);
double mean_value(const Field& f);

// Face-difference Dirichlet energy: sum over interior faces of
// ((f_R - f_L)/h)^2 times cell volume. Neumann boundary faces contribute 0.
// Equals -integral(f * laplacian_neumann(f)) up to roundoff.
double grad_sq_integral(const Field& f);

// Cell-centered |grad f|^2 density: per axis, the average of the squared
// gradients on the two adjacent faces. Integrates to grad_sq_integral.
Field grad_sq_density(const Field& f);

// Solves -laplacian phi = f - <f> with <phi> = 0. Direct flux elimination
// in 1D; deflated Jacobi-preconditioned conjugate gradients in 2D. The
// residual satisfies ||-L phi - (f - <f>)||_inf <= 1e-12 ||f||_inf.
Field poisson_neumann_solve(const Field& f);

// Dual norm of zero-mean data: sqrt(grad_sq_integral(phi)) with phi the
// Poisson solution above. The mean of f is removed internally.
double h_minus1_norm(const Field& f);

}  // namespace crossdiff
