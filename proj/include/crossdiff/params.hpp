// Parameter set for the two-species cross-diffusion competition system,
// admissibility validation, coefficient laws, and the per-point flux map
// A(u,v) = (a1(u,v) u, a2(v) v) together with its inverse.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace crossdiff {

// Thrown by validate_params; the message names the first violated inequality.
struct InadmissibleParams : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NegativeInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scalar root-finding failed to bracket or converge.
struct NoConvergence : std::runtime_error {
  NoConvergence(const std::string& msg, int iterations_)
      : std::runtime_error(msg), iterations(iterations_) {}
  int iterations = 0;
};

// The 18-entry parameter vector. Diffusion laws:
//   a1(u,v) = d_u + d_alpha u^alpha + d_beta v^beta
//   a2(v)   = d_v + d_gamma v^gamma
// Reaction laws:
//   r1(u,v) = r_u - r_a u^a - r_b v^b   (multiplies u)
//   r2(u,v) = r_v - r_c v^c - r_d u^d   (multiplies v)
//
// With strict_validation on, the 15 entries {d_u..d} must be strictly
// positive, beta > 0, alpha >= 0, gamma >= 0, and the exponent gate
//   (alpha > 0, d < 2 + alpha, a < 1 + alpha)  or  (alpha = 0, d <= 2, a <= 1)
// must hold. strict_validation off additionally permits zero reaction
// rates; this exists solely for decoupled linear oracle runs, and
// diagnostics that divide by a zero rate report NotApplicable.
struct ParamSet {
  double d_u = 1.0;
  double d_v = 1.0;
  double d_alpha = 1.0;
  double d_beta = 1.0;
  double d_gamma = 1.0;
  double r_u = 1.0;
  double r_v = 1.0;
  double r_a = 1.0;
  double r_b = 1.0;
  double r_c = 1.0;
  double r_d = 1.0;
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double d = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  bool strict_validation = true;
};

// Overlapping regime flags for an admissible parameter set.
struct Regime {
  // alpha >= 0, d < 2 + alpha, a < 1 + alpha (strict inequalities).
  bool strict = false;
  // alpha == 0, a <= 1, d <= 2 (closure of the gate at alpha = 0).
  bool alpha_zero_boundary = false;
  // gamma == 0: the second equation has a constant diffusion law,
  // enabling the parabolic regularity report.
  bool gamma_zero = false;
};

// Checks the admissibility conditions and classifies the regime.
// Throws InadmissibleParams naming the first violated inequality.
Regime validate_params(const ParamSet& p);

// z^e for z >= 0 with the conventions: e == 0 returns 1 identically
// (including at z = 0), and z == 0 with e > 0 returns exactly 0.
double pow_pos(double z, double e);

// a1(u,v); requires u, v >= 0; always >= d_u.
double diffusion_u(const ParamSet& p, double u, double v);
// a2(v); requires v >= 0; always >= d_v.
double diffusion_v(const ParamSet& p, double v);
// u * r1(u,v); requires u, v >= 0.
double reaction_u(const ParamSet& p, double u, double v);
// v * r2(u,v); requires u, v >= 0.
double reaction_v(const ParamSet& p, double u, double v);

// (w1, w2) = (a1(u,v) u, a2(v) v).
std::pair<double, double> map_A(const ParamSet& p, double u, double v);

// Inverse of map_A on the closed positive quadrant. Solves w2 = a2(v) v
// for v first (the map v -> a2(v) v is strictly increasing), then
// w1 = a1(u,v) u for u. Bracketed bisection followed by Newton polish;
// round-trips with map_A to 1e-10 relative. Throws NoConvergence if the
// inputs cannot be bracketed (non-finite or negative).
std::pair<double, double> invert_A(const ParamSet& p, double w1, double w2);

}  // namespace crossdiff
