#include "examini/mhd/problems.hpp"

#include <numbers>

#include <Eigen/Geometry>

namespace examini::mhd {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

/// Coordinate of the lower face of global cell `idx` along `axis`.
double face_coord(const GridSpec& grid, int axis, int idx) {
  return grid.extent[axis][0] + idx * grid.dx(axis);
}

template <typename Fn>
void for_all(const BlockGeometry& geo, int lo_pad, int hi_pad, Fn&& fn) {
  for (int k = -lo_pad; k < geo.n[2] + hi_pad; ++k)
    for (int j = -lo_pad; j < geo.n[1] + hi_pad; ++j)
      for (int i = -lo_pad; i < geo.n[0] + hi_pad; ++i) fn(i, j, k);
}

}  // namespace

Eigen::Vector3d cell_center(const GridSpec& grid, const BlockGeometry& geo,
                            int i, int j, int k) {
  const std::array<int, 3> idx{i, j, k};
  Eigen::Vector3d x;
  for (int a = 0; a < 3; ++a)
    x[a] = grid.extent[a][0] + (geo.offset[a] + idx[a] + 0.5) * grid.dx(a);
  return x;
}

MhdBlock init_orszag_tang_3d(const GridSpec& grid, const BlockGeometry& geo,
                             double gamma, DivBMode mode) {
  MhdBlock b(geo);
  const double rho = 25.0 / (36.0 * kPi);
  const double p = 5.0 / (12.0 * kPi);
  const double b0 = 1.0 / std::sqrt(4.0 * kPi);
  const double dx = grid.dx(0), dy = grid.dx(1);
  auto az = [&](double x, double y) {
    return b0 * (std::cos(4.0 * kPi * x) / (4.0 * kPi) +
                 std::cos(2.0 * kPi * y) / (2.0 * kPi));
  };

  if (mode == DivBMode::CT) {
    // Face fluxes of curl(A_z z-hat) from edge values of A_z.
    for_all(geo, geo.g, geo.g, [&](int i, int j, int k) {
      const auto c = geo.index(i, j, k);
      const double xm = face_coord(grid, 0, geo.offset[0] + i);
      const double ym = face_coord(grid, 1, geo.offset[1] + j);
      b.faces.bx[c] = (az(xm, ym + dy) - az(xm, ym)) / dy;
      b.faces.by[c] = -(az(xm + dx, ym) - az(xm, ym)) / dx;
      b.faces.bz[c] = 0.0;
    });
  }

  for_all(geo, 0, 0, [&](int i, int j, int k) {
    const auto c = geo.index(i, j, k);
    const Eigen::Vector3d x = cell_center(grid, geo, i, j, k);
    PrimState w;
    w[RHO] = rho;
    w[VX] = -std::sin(2.0 * kPi * x[1]);
    w[VY] = std::sin(2.0 * kPi * x[0]);
    w[VZ] = 0.01 * std::sin(2.0 * kPi * x[2]);
    w[PRS] = p;
    if (mode == DivBMode::CT) {
      w[BX] = 0.5 * (b.faces.bx[c] + b.faces.bx[c + geo.stride(0)]);
      w[BY] = 0.5 * (b.faces.by[c] + b.faces.by[c + geo.stride(1)]);
      w[BZ] = 0.0;
    } else {
      w[BX] = -b0 * std::sin(2.0 * kPi * x[1]);
      w[BY] = b0 * std::sin(4.0 * kPi * x[0]);
      w[BZ] = 0.0;
    }
    w[PSI] = 0.0;
    b.set_cell(c, prim_to_cons(w, gamma));
  });
  return b;
}

double CpAlfvenSolution::period() const {
  return 2.0 * kPi / (k.norm() * speed());
}

PrimState CpAlfvenSolution::cell_average(const Eigen::Vector3d& x,
                                         const Eigen::Vector3d& h,
                                         double t) const {
  const double phase = k.dot(x) - k.norm() * speed() * t;
  const double s = sinc(0.5 * k[0] * h[0]) * sinc(0.5 * k[1] * h[1]) *
                   sinc(0.5 * k[2] * h[2]);
  const Eigen::Vector3d bperp =
      amplitude * s * (std::sin(phase) * e2 + std::cos(phase) * e3);
  const Eigen::Vector3d bvec = b_par * e1 + bperp;
  const Eigen::Vector3d v = -bperp / std::sqrt(rho);
  PrimState w;
  w << rho, v[0], v[1], v[2], pressure, bvec[0], bvec[1], bvec[2], 0.0;
  return w;
}

double CpAlfvenSolution::face_average_b(int axis, const Eigen::Vector3d& x,
                                        const Eigen::Vector3d& h,
                                        double t) const {
  const double phase = k.dot(x) - k.norm() * speed() * t;
  double s = 1.0;
  for (int a = 0; a < 3; ++a)
    if (a != axis) s *= sinc(0.5 * k[a] * h[a]);
  return b_par * e1[axis] +
         amplitude * s * (std::sin(phase) * e2[axis] + std::cos(phase) * e3[axis]);
}

CpAlfvenSolution cp_alfven_solution(const GridSpec& grid, double amplitude,
                                    std::array<int, 3> cycles, double gamma) {
  CpAlfvenSolution sol;
  for (int a = 0; a < 3; ++a)
    sol.k[a] = 2.0 * kPi * cycles[a] / (grid.extent[a][1] - grid.extent[a][0]);
  if (sol.k.norm() == 0.0) throw InvalidArgument("CP Alfven wavevector is zero");
  sol.e1 = sol.k.normalized();
  Eigen::Vector3d ref = Eigen::Vector3d::UnitZ();
  if (std::abs(sol.e1.dot(ref)) > 0.9) ref = Eigen::Vector3d::UnitX();
  sol.e2 = sol.e1.cross(ref).normalized();
  sol.e3 = sol.e1.cross(sol.e2);
  sol.amplitude = amplitude;
  sol.gamma = gamma;
  return sol;
}

MhdBlock init_cp_alfven(const GridSpec& grid, const BlockGeometry& geo,
                        const CpAlfvenSolution& sol, DivBMode mode) {
  MhdBlock b(geo);
  const Eigen::Vector3d h(grid.dx(0), grid.dx(1), grid.dx(2));
  if (mode == DivBMode::CT) {
    for_all(geo, geo.g, geo.g, [&](int i, int j, int k) {
      const auto c = geo.index(i, j, k);
      const Eigen::Vector3d x = cell_center(grid, geo, i, j, k);
      for (int a = 0; a < 3; ++a) {
        Eigen::Vector3d xf = x;
        xf[a] -= 0.5 * h[a];
        b.faces[a][c] = sol.face_average_b(a, xf, h, 0.0);
      }
    });
  }
  // |v|^2 and |B|^2 are uniform pointwise, so the energy average is exact.
  const double e_avg = sol.pressure / (sol.gamma - 1.0) +
                       0.5 * sol.amplitude * sol.amplitude +
                       0.5 * (sol.b_par * sol.b_par + sol.amplitude * sol.amplitude);
  for_all(geo, 0, 0, [&](int i, int j, int k) {
    const auto c = geo.index(i, j, k);
    PrimState w = sol.cell_average(cell_center(grid, geo, i, j, k), h, 0.0);
    if (mode == DivBMode::CT) {
      for (int a = 0; a < 3; ++a)
        w[BX + a] = 0.5 * (b.faces[a][c] + b.faces[a][c + geo.stride(a)]);
    }
    ConsState u = prim_to_cons(w, sol.gamma);
    u[ENG] = e_avg;
    b.set_cell(c, u);
  });
  return b;
}

MhdBlock init_problem(const MhdConfig& cfg, const BlockGeometry& geo) {
  if (cfg.problem == "orszag_tang")
    return init_orszag_tang_3d(cfg.grid, geo, cfg.gamma, cfg.divb);
  if (cfg.problem == "cp_alfven")
    return init_cp_alfven(
        cfg.grid, geo,
        cp_alfven_solution(cfg.grid, cfg.amplitude, cfg.wave_cycles, cfg.gamma),
        cfg.divb);
  throw InvalidArgument("unknown problem '" + cfg.problem + "'");
}

}  // namespace examini::mhd
