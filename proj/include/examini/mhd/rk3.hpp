#pragma once

#include <array>

namespace examini::mhd {

/// SSP-RK3 stage weights in increment form: after stage s,
/// U <- U0 + c[s] * (U + dt * L(U) - U0).
inline constexpr std::array<double, 3> kRk3Weights{1.0, 0.25, 2.0 / 3.0};

/// Generic three-stage SSP-RK3 step. `rhs(u, stage)` returns L(u); works for
/// scalars and Eigen arrays alike. A zero right-hand side leaves the state
/// bitwise unchanged.
template <typename State, typename Rhs>
State rk3_step(const State& u0, double dt, Rhs&& rhs) {
  State u = u0;
  for (int s = 0; s < 3; ++s) {
    const State l = rhs(u, s);
    u = u0 + kRk3Weights[s] * (u + dt * l - u0);
  }
  return u;
}

}  // namespace examini::mhd
