#pragma once

#include <cstdint>

#include "netgame/equilibrium.hpp"
#include "netgame/model.hpp"
#include "netgame/rng.hpp"

namespace netgame::testing {

struct EconomyRanges {
  double b_lo = 0.05, b_hi = 0.5;
  double c_lo = 1.0, c_hi = 2.0;
  double s_lo = 0.0, s_hi = 0.3;
  double f_lo = 1.0, f_hi = 3.0;
  double rho_lo = 0.05, rho_hi = 0.4;
};

inline GameParameters random_economy(std::uint64_t seed, int n, const EconomyRanges& r = {}) {
  CounterRng rng(seed);
  Vector b(n), c(n);
  for (int i = 0; i < n; ++i) b(i) = rng.uniform(r.b_lo, r.b_hi);
  for (int i = 0; i < n; ++i) c(i) = rng.uniform(r.c_lo, r.c_hi);
  Matrix s = Matrix::Zero(n, n), f = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) s(i, j) = s(j, i) = rng.uniform(r.s_lo, r.s_hi);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) f(i, j) = rng.uniform(r.f_lo, r.f_hi);
    }
  }
  return GameParameters(b, c, s, f, rng.uniform(r.rho_lo, r.rho_hi));
}

inline Intervention random_intervention(std::uint64_t seed, int n, double scale) {
  CounterRng rng(seed ^ 0x5bd1e995ULL);
  Vector beta(n);
  for (int i = 0; i < n; ++i) beta(i) = scale * rng.uniform();
  Matrix sigma = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) sigma(i, j) = sigma(j, i) = scale * rng.uniform();
  }
  return Intervention(beta, sigma);
}

}  // namespace netgame::testing
