// Independent reference solutions used by the test and acceptance suites:
// the spatially homogeneous ODE reduction integrated with classical RK4,
// and the decaying Neumann eigenmode of the discrete diffusion operator.
#pragma once

#include "crossdiff/grid.hpp"
#include "crossdiff/params.hpp"

namespace crossdiff {

struct OdeState {
  double u = 0.0;
  double v = 0.0;
  double time = 0.0;
};

// Integrates u' = u (r_u - r_a u^a - r_b v^b), v' = v (r_v - r_c v^c - r_d u^d)
// from (u0, v0) to time T with `substeps` classical fourth-order steps
// (default 10^6, error O(dt^4)).
OdeState homogeneous_ode_reference(const ParamSet& p, double u0, double v0, double T,
                                   long substeps = 1000000);

// Discrete eigenvalue of the mirror-ghost Neumann Laplacian for the
// cosine mode cos(k pi x / L) sampled at cell centers.
double neumann_mode_eigenvalue(double h, double length, int k_mode);

// cos(k_mode pi x / L) exp(-diffusivity * lambda_h * T) on the grid, using
// the discrete eigenvalue so that a comparison against the implicit scheme
// measures only the time-discretization error. In 2D the mode is the
// product cosine in x and y and lambda_h is the sum of the axis eigenvalues.
Field heat_mode_reference(const Grid& grid, double diffusivity, int k_mode, double T);

}  // namespace crossdiff
