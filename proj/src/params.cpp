#include "crossdiff/params.hpp"

#include <cmath>
#include <limits>

namespace crossdiff {

namespace {

constexpr double kLogFloor = 1e-300;

void require_positive(double value, const char* name, std::string& fail) {
  if (!(value > 0.0) && fail.empty()) {
    fail = std::string(name) + " > 0 violated";
  }
}

void require_nonnegative(double value, const char* name, std::string& fail) {
  if (!(value >= 0.0) && fail.empty()) {
    fail = std::string(name) + " >= 0 violated";
  }
}

}  // namespace

Regime validate_params(const ParamSet& p) {
  std::string fail;
  require_positive(p.d_u, "d_u", fail);
  require_positive(p.d_v, "d_v", fail);
  require_positive(p.d_alpha, "d_alpha", fail);
  require_positive(p.d_beta, "d_beta", fail);
  require_positive(p.d_gamma, "d_gamma", fail);
  if (p.strict_validation) {
    require_positive(p.r_u, "r_u", fail);
    require_positive(p.r_v, "r_v", fail);
    require_positive(p.r_a, "r_a", fail);
    require_positive(p.r_b, "r_b", fail);
    require_positive(p.r_c, "r_c", fail);
    require_positive(p.r_d, "r_d", fail);
  } else {
    require_nonnegative(p.r_u, "r_u", fail);
    require_nonnegative(p.r_v, "r_v", fail);
    require_nonnegative(p.r_a, "r_a", fail);
    require_nonnegative(p.r_b, "r_b", fail);
    require_nonnegative(p.r_c, "r_c", fail);
    require_nonnegative(p.r_d, "r_d", fail);
  }
  require_positive(p.a, "a", fail);
  require_positive(p.b, "b", fail);
  require_positive(p.c, "c", fail);
  require_positive(p.d, "d", fail);
  require_nonnegative(p.alpha, "alpha", fail);
  require_positive(p.beta, "beta", fail);
  require_nonnegative(p.gamma, "gamma", fail);
  if (!fail.empty()) {
    throw InadmissibleParams(fail);
  }

  // Exponent gate.
  if (p.alpha > 0.0) {
    if (!(p.d < 2.0 + p.alpha)) {
      throw InadmissibleParams("d < 2 + alpha violated");
    }
    if (!(p.a < 1.0 + p.alpha)) {
      throw InadmissibleParams("a < 1 + alpha violated");
    }
  } else {
    if (!(p.d <= 2.0)) {
      throw InadmissibleParams("d <= 2 violated (alpha = 0)");
    }
    if (!(p.a <= 1.0)) {
      throw InadmissibleParams("a <= 1 violated (alpha = 0)");
    }
  }

  Regime regime;
  regime.strict = (p.d < 2.0 + p.alpha) && (p.a < 1.0 + p.alpha);
  regime.alpha_zero_boundary = (p.alpha == 0.0) && (p.a <= 1.0) && (p.d <= 2.0);
  regime.gamma_zero = (p.gamma == 0.0);
  return regime;
}

double pow_pos(double z, double e) {
  if (e == 0.0) return 1.0;
  if (z <= 0.0) return 0.0;
  if (e == 1.0) return z;
  if (e == 2.0) return z * z;
  if (e == 0.5) return std::sqrt(z);
  return std::exp(e * std::log(z < kLogFloor ? kLogFloor : z));
}

namespace {

void check_nonnegative_inputs(double u, double v) {
  if (u < 0.0 || v < 0.0 || std::isnan(u) || std::isnan(v)) {
    throw NegativeInput("coefficient law evaluated at negative input");
  }
}

}  // namespace

double diffusion_u(const ParamSet& p, double u, double v) {
  check_nonnegative_inputs(u, v);
  return p.d_u + p.d_alpha * pow_pos(u, p.alpha) + p.d_beta * pow_pos(v, p.beta);
}

double diffusion_v(const ParamSet& p, double v) {
  check_nonnegative_inputs(v, 0.0);
  return p.d_v + p.d_gamma * pow_pos(v, p.gamma);
}

double reaction_u(const ParamSet& p, double u, double v) {
  check_nonnegative_inputs(u, v);
  return u * (p.r_u - p.r_a * pow_pos(u, p.a) - p.r_b * pow_pos(v, p.b));
}

double reaction_v(const ParamSet& p, double u, double v) {
  check_nonnegative_inputs(u, v);
  return v * (p.r_v - p.r_c * pow_pos(v, p.c) - p.r_d * pow_pos(u, p.d));
}

std::pair<double, double> map_A(const ParamSet& p, double u, double v) {
  return {diffusion_u(p, u, v) * u, diffusion_v(p, v) * v};
}

namespace {

// Solves g(z) = (c0 + c1 z^e) z - w = 0 for z >= 0, where c0 > 0,
// c1 >= 0, e >= 0 and w >= 0. g is strictly increasing with g(0) = -w,
// so [0, w/c0] brackets the root. Bisection to width 1e-14 (or until the
// bracket stops shrinking), then three Newton steps to polish.
double solve_increasing(double c0, double c1, double e, double w) {
  if (!(std::isfinite(w)) || w < 0.0) {
    throw NoConvergence("invert_A: target not finite and nonnegative", 0);
  }
  if (w == 0.0) return 0.0;

  auto g = [&](double z) { return (c0 + c1 * pow_pos(z, e)) * z - w; };
  double lo = 0.0;
  double hi = w / c0;
  if (!(g(hi) >= 0.0)) {
    throw NoConvergence("invert_A: failed to bracket root", 0);
  }
  int it = 0;
  for (; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
    if (g(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double z = 0.5 * (lo + hi);
  for (int k = 0; k < 3; ++k) {
    const double zp = (e == 0.0) ? 1.0 : pow_pos(z, e);
    const double dg = c0 + c1 * (e + 1.0) * zp;
    const double step = g(z) / dg;
    double znew = z - step;
    if (!(znew > 0.0)) znew = 0.5 * z;
    z = znew;
  }
  return z;
}

}  // namespace

std::pair<double, double> invert_A(const ParamSet& p, double w1, double w2) {
  const double v = solve_increasing(p.d_v, p.d_gamma, p.gamma, w2);
  // With v fixed, a1(u,v) u = (d_u + d_beta v^beta + d_alpha u^alpha) u.
  const double c0 = p.d_u + p.d_beta * pow_pos(v, p.beta);
  const double u = solve_increasing(c0, p.d_alpha, p.alpha, w1);
  return {u, v};
}

}  // namespace crossdiff
