#pragma once

#include <array>
#include <cmath>

#include <Eigen/Core>

#include "examini/mhd/solver.hpp"

namespace examini::mhd {

/// Periodic Orszag-Tang vortex on the unit cube, replicated in z with a
/// 0.01 sin(2 pi z) z-velocity. In CT mode face fields come from the
/// vector potential, so the discrete divergence starts at round-off.
MhdBlock init_orszag_tang_3d(const GridSpec& grid, const BlockGeometry& geo,
                             double gamma, DivBMode mode);

/// Exact circularly polarised Alfven wave: rho = 1, p = 0.1, B_par = 1,
/// v_perp = -B_perp / sqrt(rho), travelling along k.
struct CpAlfvenSolution {
  Eigen::Vector3d k;       // wavevector (rad / length)
  Eigen::Vector3d e1, e2, e3;  // k-hat and two transverse unit vectors
  double amplitude = 0.1;
  double rho = 1.0;
  double pressure = 0.1;
  double b_par = 1.0;
  double gamma = 5.0 / 3.0;

  double speed() const { return b_par / std::sqrt(rho); }
  double period() const;
  /// Exact cell average of the primitive state over the box centred at x
  /// with widths h (psi = 0).
  PrimState cell_average(const Eigen::Vector3d& x, const Eigen::Vector3d& h,
                         double t) const;
  /// Exact average of the field component normal to a face of the given
  /// axis, centred at x with widths h (h[axis] is ignored).
  double face_average_b(int axis, const Eigen::Vector3d& x,
                        const Eigen::Vector3d& h, double t) const;
};

CpAlfvenSolution cp_alfven_solution(const GridSpec& grid, double amplitude,
                                    std::array<int, 3> cycles, double gamma);

/// Cell-average initial data of the wave (exact averages). In CT mode the
/// staggered field uses exact face averages.
MhdBlock init_cp_alfven(const GridSpec& grid, const BlockGeometry& geo,
                        const CpAlfvenSolution& sol, DivBMode mode);

/// Dispatches on cfg.problem.
MhdBlock init_problem(const MhdConfig& cfg, const BlockGeometry& geo);

/// Global cell centre of local cell (i, j, k).
Eigen::Vector3d cell_center(const GridSpec& grid, const BlockGeometry& geo,
                            int i, int j, int k);

}  // namespace examini::mhd
