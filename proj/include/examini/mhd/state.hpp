#pragma once

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "examini/core/error.hpp"

namespace examini::mhd {

/// Carries the global cell index of the offending cell (-1 when unknown).
class UnphysicalState : public Error {
 public:
  UnphysicalState(std::string kind, const std::string& what,
                  std::array<int, 3> cell)
      : Error(std::move(kind), what + " at cell (" + std::to_string(cell[0]) +
                                   "," + std::to_string(cell[1]) + "," +
                                   std::to_string(cell[2]) + ")"),
        cell_(cell) {}
  std::array<int, 3> cell() const { return cell_; }

 protected:
  struct Raw {};
  // `what` is a full message of an error of the same kind.
  UnphysicalState(Raw, const std::string& kind, const std::string& what,
                  std::array<int, 3> cell)
      : Error(kind, what.substr(kind.size() + 2)), cell_(cell) {}

 private:
  std::array<int, 3> cell_;
};

class NegativePressure : public UnphysicalState {
 public:
  NegativePressure(const std::string& what, std::array<int, 3> cell)
      : UnphysicalState("NegativePressure", what, cell) {}
  /// Same error with `context` (stage, step) appended to the message.
  NegativePressure(const NegativePressure& e, const std::string& context)
      : UnphysicalState(Raw{}, "NegativePressure",
                        std::string(e.what()) + ", " + context, e.cell()) {}
};

class NegativeDensity : public UnphysicalState {
 public:
  NegativeDensity(const std::string& what, std::array<int, 3> cell)
      : UnphysicalState("NegativeDensity", what, cell) {}
  NegativeDensity(const NegativeDensity& e, const std::string& context)
      : UnphysicalState(Raw{}, "NegativeDensity",
                        std::string(e.what()) + ", " + context, e.cell()) {}
};

/// Variable slots shared by primitive and conservative vectors.
/// Primitive: rho, vx, vy, vz, p, Bx, By, Bz, psi.
/// Conservative: rho, mx, my, mz, E, Bx, By, Bz, psi.
enum Var : int { RHO = 0, VX, VY, VZ, PRS, BX, BY, BZ, PSI, NVAR };
inline constexpr int MX = VX, MY = VY, MZ = VZ, ENG = PRS;

template <typename Scalar>
using StateVec = Eigen::Matrix<Scalar, NVAR, 1>;

using PrimState = StateVec<double>;
using ConsState = StateVec<double>;

template <typename Scalar>
StateVec<Scalar> prim_to_cons(const StateVec<Scalar>& w, Scalar gamma) {
  StateVec<Scalar> u;
  const Scalar rho = w[RHO];
  const Scalar v2 = w[VX] * w[VX] + w[VY] * w[VY] + w[VZ] * w[VZ];
  const Scalar b2 = w[BX] * w[BX] + w[BY] * w[BY] + w[BZ] * w[BZ];
  u[RHO] = rho;
  u[MX] = rho * w[VX];
  u[MY] = rho * w[VY];
  u[MZ] = rho * w[VZ];
  u[ENG] = w[PRS] / (gamma - Scalar(1)) + Scalar(0.5) * rho * v2 +
           Scalar(0.5) * b2;
  u[BX] = w[BX];
  u[BY] = w[BY];
  u[BZ] = w[BZ];
  u[PSI] = w[PSI];
  return u;
}

/// Pressure recovered from a conservative vector, no positivity check.
template <typename Scalar>
Scalar recovered_pressure(const StateVec<Scalar>& u, Scalar gamma) {
  const Scalar m2 = u[MX] * u[MX] + u[MY] * u[MY] + u[MZ] * u[MZ];
  const Scalar b2 = u[BX] * u[BX] + u[BY] * u[BY] + u[BZ] * u[BZ];
  return (gamma - Scalar(1)) *
         (u[ENG] - Scalar(0.5) * m2 / u[RHO] - Scalar(0.5) * b2);
}

/// Throws NegativeDensity / NegativePressure for unphysical input.
template <typename Scalar>
StateVec<Scalar> cons_to_prim(const StateVec<Scalar>& u, Scalar gamma,
                              std::array<int, 3> cell = {-1, -1, -1}) {
  if (!(u[RHO] > Scalar(0)))
    throw NegativeDensity("density " + std::to_string(double(u[RHO])), cell);
  StateVec<Scalar> w;
  const Scalar inv = Scalar(1) / u[RHO];
  w[RHO] = u[RHO];
  w[VX] = u[MX] * inv;
  w[VY] = u[MY] * inv;
  w[VZ] = u[MZ] * inv;
  w[PRS] = recovered_pressure(u, gamma);
  w[BX] = u[BX];
  w[BY] = u[BY];
  w[BZ] = u[BZ];
  w[PSI] = u[PSI];
  if (!(w[PRS] > Scalar(0)))
    throw NegativePressure("pressure " + std::to_string(double(w[PRS])), cell);
  return w;
}

/// Ideal-MHD flux along x of primitive state w (psi coupling excluded).
template <typename Scalar>
StateVec<Scalar> physical_flux_x(const StateVec<Scalar>& w, Scalar gamma) {
  const Scalar rho = w[RHO], u = w[VX], v = w[VY], vw = w[VZ];
  const Scalar bx = w[BX], by = w[BY], bz = w[BZ];
  const Scalar b2 = bx * bx + by * by + bz * bz;
  const Scalar pt = w[PRS] + Scalar(0.5) * b2;
  const Scalar e = w[PRS] / (gamma - Scalar(1)) +
                   Scalar(0.5) * rho * (u * u + v * v + vw * vw) +
                   Scalar(0.5) * b2;
  const Scalar vb = u * bx + v * by + vw * bz;
  StateVec<Scalar> f;
  f[RHO] = rho * u;
  f[MX] = rho * u * u + pt - bx * bx;
  f[MY] = rho * u * v - bx * by;
  f[MZ] = rho * u * vw - bx * bz;
  f[ENG] = (e + pt) * u - bx * vb;
  f[BX] = Scalar(0);
  f[BY] = by * u - bx * v;
  f[BZ] = bz * u - bx * vw;
  f[PSI] = Scalar(0);
  return f;
}

/// Fast magnetosonic speed along x.
template <typename Scalar>
Scalar fast_speed_x(const StateVec<Scalar>& w, Scalar gamma) {
  using std::sqrt;
  const Scalar inv_rho = Scalar(1) / w[RHO];
  const Scalar a2 = gamma * w[PRS] * inv_rho;
  const Scalar b2 =
      (w[BX] * w[BX] + w[BY] * w[BY] + w[BZ] * w[BZ]) * inv_rho;
  const Scalar bx2 = w[BX] * w[BX] * inv_rho;
  const Scalar s = a2 + b2;
  const Scalar disc = s * s - Scalar(4) * a2 * bx2;
  return sqrt(Scalar(0.5) * (s + sqrt(disc > Scalar(0) ? disc : Scalar(0))));
}

/// Axis-cyclic permutation mapping axis `d` onto x: components are
/// reordered (d, d+1, d+2) so the frame stays right-handed.
template <typename Scalar>
StateVec<Scalar> rotate_to_x(const StateVec<Scalar>& w, int d) {
  if (d == 0) return w;
  StateVec<Scalar> r = w;
  for (int c = 0; c < 3; ++c) {
    r[VX + c] = w[VX + (d + c) % 3];
    r[BX + c] = w[BX + (d + c) % 3];
  }
  return r;
}

template <typename Scalar>
StateVec<Scalar> rotate_from_x(const StateVec<Scalar>& w, int d) {
  if (d == 0) return w;
  StateVec<Scalar> r = w;
  for (int c = 0; c < 3; ++c) {
    r[VX + (d + c) % 3] = w[VX + c];
    r[BX + (d + c) % 3] = w[BX + c];
  }
  return r;
}

template <typename Scalar>
StateVec<Scalar> physical_flux(const StateVec<Scalar>& w, int axis,
                               Scalar gamma) {
  return rotate_from_x(physical_flux_x(rotate_to_x(w, axis), gamma), axis);
}

}  // namespace examini::mhd
