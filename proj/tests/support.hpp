// Shared helpers for the test suites: seeded random admissible parameter
// sets and random positive fields.
#pragma once

#include <random>

#include "crossdiff/grid.hpp"
#include "crossdiff/params.hpp"

namespace crossdiff::testing {

// Draws a parameter set satisfying the admissibility gate. Exponents are
// kept away from the singular end (>= 0.3) and coefficients in [0.2, 2].
inline ParamSet random_admissible_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(0.2, 2.0);
  std::uniform_real_distribution<double> expo(0.3, 1.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ParamSet p;
  p.d_u = coef(rng);
  p.d_v = coef(rng);
  p.d_alpha = coef(rng);
  p.d_beta = coef(rng);
  p.d_gamma = coef(rng);
  p.r_u = coef(rng);
  p.r_v = coef(rng);
  p.r_a = coef(rng);
  p.r_b = coef(rng);
  p.r_c = coef(rng);
  p.r_d = coef(rng);
  p.b = expo(rng);
  p.c = expo(rng);
  p.beta = expo(rng);
  p.alpha = unit(rng) < 0.3 ? 0.0 : expo(rng);
  p.gamma = unit(rng) < 0.3 ? 0.0 : expo(rng);
  if (p.alpha == 0.0) {
    p.a = 0.3 + 0.7 * unit(rng);          // a <= 1
    p.d = 0.3 + 1.7 * unit(rng);          // d <= 2
  } else {
    p.a = 0.3 + (0.95 * (1.0 + p.alpha) - 0.3) * unit(rng);
    p.d = 0.3 + (0.95 * (2.0 + p.alpha) - 0.3) * unit(rng);
  }
  return p;
}

inline Field random_field(const Grid& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Field f(g);
  for (double& v : f.values) v = dist(rng);
  return f;
}

}  // namespace crossdiff::testing
