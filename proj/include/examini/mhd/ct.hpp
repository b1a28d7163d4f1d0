#pragma once

#include <array>

#include "examini/mhd/grid.hpp"

namespace examini::mhd {

/// Staggered magnetic field. bx(i,j,k) lives on face (i-1/2, j, k),
/// by(i,j,k) on (i, j-1/2, k), bz(i,j,k) on (i, j, k-1/2).
struct FaceB {
  BlockGeometry geo;
  BlockField bx, by, bz;

  explicit FaceB(const BlockGeometry& g = {})
      : geo(g),
        bx(BlockField::Zero(g.size())),
        by(BlockField::Zero(g.size())),
        bz(BlockField::Zero(g.size())) {}

  BlockField& operator[](int axis) { return axis == 0 ? bx : axis == 1 ? by : bz; }
  const BlockField& operator[](int axis) const {
    return axis == 0 ? bx : axis == 1 ? by : bz;
  }
};

/// Edge-centred electric field. ex(i,j,k) lives on edge (i, j-1/2, k-1/2),
/// ey on (i-1/2, j, k-1/2), ez on (i-1/2, j-1/2, k).
struct EdgeEmf {
  BlockGeometry geo;
  BlockField ex, ey, ez;

  explicit EdgeEmf(const BlockGeometry& g = {})
      : geo(g),
        ex(BlockField::Zero(g.size())),
        ey(BlockField::Zero(g.size())),
        ez(BlockField::Zero(g.size())) {}

  BlockField& operator[](int axis) { return axis == 0 ? ex : axis == 1 ? ey : ez; }
  const BlockField& operator[](int axis) const {
    return axis == 0 ? ex : axis == 1 ? ey : ez;
  }
};

/// Face fluxes of the induction equation, indexed like FaceB: flux[a][c]
/// is the flux of B_c through faces normal to axis a.
using InductionFluxes = std::array<std::array<const BlockField*, 3>, 3>;

/// Arithmetic average of the four face fluxes around each edge, for edges
/// bounding faces in [0, n] along every axis.
void average_edge_emf(const InductionFluxes& flux, EdgeEmf& emf);

/// Faraday update b -= dt * curl(E) on faces [0, n] (normal) x [0, n)
/// (transverse). Discrete divergence is preserved to round-off.
FaceB ct_update(const FaceB& b, const EdgeEmf& emf, double dt,
                const std::array<double, 3>& dx);

/// Face-difference divergence for interior cells (ghost entries are zero).
BlockField face_divergence(const FaceB& b, const std::array<double, 3>& dx);

}  // namespace examini::mhd
