#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "examini/mhd/state.hpp"

namespace examini::mhd {

enum class RiemannSolver { HLLD, HLL };

/// Diagnostic counters; degenerate HLLD fans fall back to HLL.
struct RiemannStats {
  std::uint64_t calls = 0;
  std::uint64_t hll_fallbacks = 0;
};

/// Wave structure of an HLLD solution in the x-normal frame: speeds
/// SL <= SL* <= SM <= SR* <= SR and the four intermediate states
/// UL*, UL**, UR**, UR* (conservative).
template <typename Scalar>
struct HlldFan {
  std::array<Scalar, 5> speeds{};
  std::array<StateVec<Scalar>, 6> states;  // UL, UL*, UL**, UR**, UR*, UR
  bool degenerate = false;
};

template <typename Scalar>
void hll_speeds(const StateVec<Scalar>& wl, const StateVec<Scalar>& wr,
                Scalar gamma, Scalar& sl, Scalar& sr) {
  using std::max;
  using std::min;
  const Scalar cfl = fast_speed_x(wl, gamma);
  const Scalar cfr = fast_speed_x(wr, gamma);
  const Scalar cmax = max(cfl, cfr);
  sl = min(wl[VX], wr[VX]) - cmax;
  sr = max(wl[VX], wr[VX]) + cmax;
}

/// HLL flux in the x-normal frame; wl[BX] and wr[BX] must both hold the
/// interface normal field.
template <typename Scalar>
StateVec<Scalar> hll_flux_x(const StateVec<Scalar>& wl,
                            const StateVec<Scalar>& wr, Scalar gamma) {
  Scalar sl, sr;
  hll_speeds(wl, wr, gamma, sl, sr);
  const StateVec<Scalar> fl = physical_flux_x(wl, gamma);
  if (sl >= Scalar(0)) return fl;
  const StateVec<Scalar> fr = physical_flux_x(wr, gamma);
  if (sr <= Scalar(0)) return fr;
  const StateVec<Scalar> ul = prim_to_cons(wl, gamma);
  const StateVec<Scalar> ur = prim_to_cons(wr, gamma);
  StateVec<Scalar> f = (sr * fl - sl * fr + sl * sr * (ur - ul)) / (sr - sl);
  f[BX] = Scalar(0);
  f[PSI] = Scalar(0);
  return f;
}

/// Builds the HLLD fan (Miyoshi & Kusano 2005). `fan.degenerate` is set
/// when an intermediate-state denominator vanishes.
template <typename Scalar>
HlldFan<Scalar> hlld_fan_x(const StateVec<Scalar>& wl,
                           const StateVec<Scalar>& wr, Scalar gamma) {
  using std::abs;
  using std::sqrt;
  HlldFan<Scalar> fan;
  const Scalar bx = wl[BX];
  Scalar sl, sr;
  hll_speeds(wl, wr, gamma, sl, sr);

  const StateVec<Scalar> ul = prim_to_cons(wl, gamma);
  const StateVec<Scalar> ur = prim_to_cons(wr, gamma);
  const Scalar rl = wl[RHO], rr = wr[RHO];
  const Scalar uxl = wl[VX], uxr = wr[VX];
  const Scalar ptl =
      wl[PRS] + Scalar(0.5) * (bx * bx + wl[BY] * wl[BY] + wl[BZ] * wl[BZ]);
  const Scalar ptr =
      wr[PRS] + Scalar(0.5) * (bx * bx + wr[BY] * wr[BY] + wr[BZ] * wr[BZ]);

  const Scalar dl = (sl - uxl) * rl;
  const Scalar dr = (sr - uxr) * rr;
  const Scalar sm = (dr * uxr - dl * uxl - ptr + ptl) / (dr - dl);
  const Scalar pts = (dr * ptl - dl * ptr + dl * dr * (uxr - uxl)) / (dr - dl);

  auto star = [&](const StateVec<Scalar>& w, const StateVec<Scalar>& u,
                  Scalar s, Scalar pt, StateVec<Scalar>& us) -> bool {
    const Scalar rho = w[RHO];
    const Scalar ux = w[VX];
    const Scalar rhos = rho * (s - ux) / (s - sm);
    const Scalar den = rho * (s - ux) * (s - sm) - bx * bx;
    const Scalar scale = abs(rho * (s - ux) * (s - sm)) + bx * bx;
    if (!(abs(den) > Scalar(1e-12) * scale)) return false;
    const Scalar fac_v = bx * (sm - ux) / den;
    const Scalar fac_b = (rho * (s - ux) * (s - ux) - bx * bx) / den;
    const Scalar vy = w[VY] - w[BY] * fac_v;
    const Scalar vz = w[VZ] - w[BZ] * fac_v;
    const Scalar by = w[BY] * fac_b;
    const Scalar bz = w[BZ] * fac_b;
    const Scalar vb = ux * bx + w[VY] * w[BY] + w[VZ] * w[BZ];
    const Scalar vbs = sm * bx + vy * by + vz * bz;
    us[RHO] = rhos;
    us[MX] = rhos * sm;
    us[MY] = rhos * vy;
    us[MZ] = rhos * vz;
    us[ENG] = ((s - ux) * u[ENG] - pt * ux + pts * sm + bx * (vb - vbs)) /
              (s - sm);
    us[BX] = bx;
    us[BY] = by;
    us[BZ] = bz;
    us[PSI] = u[PSI];
    return true;
  };

  StateVec<Scalar> uls, urs;
  const bool okl = star(wl, ul, sl, ptl, uls);
  const bool okr = star(wr, ur, sr, ptr, urs);
  fan.states[0] = ul;
  fan.states[5] = ur;
  if (!okl || !okr) {
    fan.degenerate = true;
    fan.speeds = {sl, sm, sm, sm, sr};
    return fan;
  }

  const Scalar sqrl = sqrt(uls[RHO]);
  const Scalar sqrr = sqrt(urs[RHO]);
  const Scalar sgn = bx > Scalar(0) ? Scalar(1) : (bx < Scalar(0) ? Scalar(-1) : Scalar(0));
  const Scalar sls = sm - abs(bx) / sqrl;
  const Scalar srs = sm + abs(bx) / sqrr;

  const Scalar vyl = uls[MY] / uls[RHO], vzl = uls[MZ] / uls[RHO];
  const Scalar vyr = urs[MY] / urs[RHO], vzr = urs[MZ] / urs[RHO];
  const Scalar inv = Scalar(1) / (sqrl + sqrr);
  const Scalar vyss = (sqrl * vyl + sqrr * vyr + (urs[BY] - uls[BY]) * sgn) * inv;
  const Scalar vzss = (sqrl * vzl + sqrr * vzr + (urs[BZ] - uls[BZ]) * sgn) * inv;
  const Scalar byss =
      (sqrl * urs[BY] + sqrr * uls[BY] + sqrl * sqrr * (vyr - vyl) * sgn) * inv;
  const Scalar bzss =
      (sqrl * urs[BZ] + sqrr * uls[BZ] + sqrl * sqrr * (vzr - vzl) * sgn) * inv;
  const Scalar vbss = sm * bx + vyss * byss + vzss * bzss;
  const Scalar vbl = sm * bx + vyl * uls[BY] + vzl * uls[BZ];
  const Scalar vbr = sm * bx + vyr * urs[BY] + vzr * urs[BZ];

  StateVec<Scalar> ulss = uls, urss = urs;
  ulss[MY] = uls[RHO] * vyss;
  ulss[MZ] = uls[RHO] * vzss;
  ulss[BY] = byss;
  ulss[BZ] = bzss;
  ulss[ENG] = uls[ENG] - sqrl * (vbl - vbss) * sgn;
  urss[MY] = urs[RHO] * vyss;
  urss[MZ] = urs[RHO] * vzss;
  urss[BY] = byss;
  urss[BZ] = bzss;
  urss[ENG] = urs[ENG] + sqrr * (vbr - vbss) * sgn;

  fan.speeds = {sl, sls, sm, srs, sr};
  fan.states = {ul, uls, ulss, urss, urs, ur};
  return fan;
}

/// HLLD flux in the x-normal frame. wl[BX] and wr[BX] must both hold the
/// interface normal field. Degenerate fans use the HLL flux.
template <typename Scalar>
StateVec<Scalar> hlld_flux_x(const StateVec<Scalar>& wl,
                             const StateVec<Scalar>& wr, Scalar gamma,
                             RiemannStats* stats = nullptr) {
  if (stats) ++stats->calls;
  Scalar sl, sr;
  hll_speeds(wl, wr, gamma, sl, sr);
  if (sl >= Scalar(0)) return physical_flux_x(wl, gamma);
  if (sr <= Scalar(0)) return physical_flux_x(wr, gamma);

  const HlldFan<Scalar> fan = hlld_fan_x(wl, wr, gamma);
  if (fan.degenerate) {
    if (stats) ++stats->hll_fallbacks;
    return hll_flux_x(wl, wr, gamma);
  }
  // Walk the Rankine-Hugoniot chain from the nearer outer state.
  const auto& s = fan.speeds;
  const auto& u = fan.states;
  StateVec<Scalar> f;
  if (s[2] >= Scalar(0)) {
    f = physical_flux_x(wl, gamma);
    for (int k = 0; k < 2 && s[k] < Scalar(0); ++k) f += s[k] * (u[k + 1] - u[k]);
  } else {
    f = physical_flux_x(wr, gamma);
    for (int k = 4; k > 2 && s[k] > Scalar(0); --k) f -= s[k] * (u[k + 1] - u[k]);
  }
  f[BX] = Scalar(0);
  f[PSI] = Scalar(0);
  return f;
}

/// Dedner GLM interface solution of the (Bn, psi) subsystem.
template <typename Scalar>
std::pair<Scalar, Scalar> glm_interface(Scalar bnl, Scalar bnr, Scalar psil,
                                        Scalar psir, Scalar ch) {
  const Scalar bn = Scalar(0.5) * (bnl + bnr) - Scalar(0.5) * (psir - psil) / ch;
  const Scalar psi = Scalar(0.5) * (psil + psir) - Scalar(0.5) * ch * (bnr - bnl);
  return {bn, psi};
}

/// Interface flux along `axis` for primitive states in the lab frame. The
/// normal field is taken as the mean of both sides; psi is passive.
template <typename Scalar>
StateVec<Scalar> riemann_flux(const StateVec<Scalar>& wl,
                              const StateVec<Scalar>& wr, int axis,
                              Scalar gamma, RiemannSolver solver,
                              RiemannStats* stats = nullptr) {
  StateVec<Scalar> l = rotate_to_x(wl, axis);
  StateVec<Scalar> r = rotate_to_x(wr, axis);
  const Scalar bn = Scalar(0.5) * (l[BX] + r[BX]);
  l[BX] = bn;
  r[BX] = bn;
  const StateVec<Scalar> f = solver == RiemannSolver::HLLD
                                 ? hlld_flux_x(l, r, gamma, stats)
                                 : hll_flux_x(l, r, gamma);
  return rotate_from_x(f, axis);
}

template <typename Scalar>
StateVec<Scalar> hlld_flux(const StateVec<Scalar>& wl,
                           const StateVec<Scalar>& wr, int axis, Scalar gamma,
                           RiemannStats* stats = nullptr) {
  return riemann_flux(wl, wr, axis, gamma, RiemannSolver::HLLD, stats);
}

}  // namespace examini::mhd
