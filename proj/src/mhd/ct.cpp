#include "examini/mhd/ct.hpp"

namespace examini::mhd {

void average_edge_emf(const InductionFluxes& flux, EdgeEmf& emf) {
  const auto& geo = emf.geo;
  const auto sx = geo.stride(0), sy = geo.stride(1), sz = geo.stride(2);
  // Ez = -F_x(By) = F_y(Bx);  Ex = -F_y(Bz) = F_z(By);  Ey = -F_z(Bx) = F_x(Bz)
  const auto& fx_by = *flux[0][1];
  const auto& fx_bz = *flux[0][2];
  const auto& fy_bx = *flux[1][0];
  const auto& fy_bz = *flux[1][2];
  const auto& fz_bx = *flux[2][0];
  const auto& fz_by = *flux[2][1];
  for (int k = 0; k <= geo.n[2]; ++k) {
    for (int j = 0; j <= geo.n[1]; ++j) {
      for (int i = 0; i <= geo.n[0]; ++i) {
        const auto c = geo.index(i, j, k);
        emf.ez[c] = 0.25 * (-fx_by[c - sy] - fx_by[c] + fy_bx[c - sx] + fy_bx[c]);
        emf.ex[c] = 0.25 * (-fy_bz[c - sz] - fy_bz[c] + fz_by[c - sy] + fz_by[c]);
        emf.ey[c] = 0.25 * (-fz_bx[c - sx] - fz_bx[c] + fx_bz[c - sz] + fx_bz[c]);
      }
    }
  }
}

FaceB ct_update(const FaceB& b, const EdgeEmf& emf, double dt,
                const std::array<double, 3>& dx) {
  FaceB out = b;
  const auto& geo = b.geo;
  const auto sx = geo.stride(0), sy = geo.stride(1), sz = geo.stride(2);
  const double cx = dt / dx[0], cy = dt / dx[1], cz = dt / dx[2];
  for (int k = 0; k <= geo.n[2]; ++k) {
    for (int j = 0; j <= geo.n[1]; ++j) {
      for (int i = 0; i <= geo.n[0]; ++i) {
        const auto c = geo.index(i, j, k);
        if (j < geo.n[1] && k < geo.n[2])
          out.bx[c] -= cy * (emf.ez[c + sy] - emf.ez[c]) -
                       cz * (emf.ey[c + sz] - emf.ey[c]);
        if (i < geo.n[0] && k < geo.n[2])
          out.by[c] -= cz * (emf.ex[c + sz] - emf.ex[c]) -
                       cx * (emf.ez[c + sx] - emf.ez[c]);
        if (i < geo.n[0] && j < geo.n[1])
          out.bz[c] -= cx * (emf.ey[c + sx] - emf.ey[c]) -
                       cy * (emf.ex[c + sy] - emf.ex[c]);
      }
    }
  }
  return out;
}

BlockField face_divergence(const FaceB& b, const std::array<double, 3>& dx) {
  const auto& geo = b.geo;
  BlockField div = BlockField::Zero(geo.size());
  const auto sx = geo.stride(0), sy = geo.stride(1), sz = geo.stride(2);
  for (int k = 0; k < geo.n[2]; ++k)
    for (int j = 0; j < geo.n[1]; ++j)
      for (int i = 0; i < geo.n[0]; ++i) {
        const auto c = geo.index(i, j, k);
        div[c] = (b.bx[c + sx] - b.bx[c]) / dx[0] +
                 (b.by[c + sy] - b.by[c]) / dx[1] +
                 (b.bz[c + sz] - b.bz[c]) / dx[2];
      }
  return div;
}

}  // namespace examini::mhd
