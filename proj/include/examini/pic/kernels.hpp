#pragma once

#include <array>
#include <utility>

#include "examini/pic/types.hpp"

namespace examini::pic {

/// Cloud-in-cell weights of the 4 nodes around (x, y); they sum to 1.
struct CicWeights {
  std::array<std::size_t, 4> node;
  std::array<double, 4> w;
};
CicWeights cic_weights(const FieldGrid& g, double x, double y);

/// 2D block decomposition of the cell lattice.
struct PicLayout {
  int px = 1, py = 1;

  int size() const { return px * py; }
  /// Half-open cell ranges [x0, x1) x [y0, y1) owned by `rank`.
  std::array<int, 4> cells(const PicConfig& cfg, int rank) const;
  int owner(const PicConfig& cfg, double x, double y) const;
};
/// Near-square layout with px >= py dividing the grid; throws
/// InvalidArgument when no such factorisation exists.
PicLayout pic_layout(const PicConfig& cfg, int ranks);

/// Particles of species `s` seeded in cells [x0,x1) x [y0,y1). Every cell
/// draws from its own stream, so the union over ranks does not depend on
/// the decomposition. Quiet start emits +v/-v pairs.
Species init_species(const PicConfig& cfg, int s, std::array<int, 4> cells);

/// Whole-domain particles plus initial fields (E = 0, B = b0).
std::pair<ParticleSet, FieldGrid> init_maxwellian(const PicConfig& cfg);
FieldGrid initial_fields(const PicConfig& cfg);

/// Implicit-midpoint mover: `iterations` fixed-point passes of
/// vbar = v + beta (E(xbar) + vbar x B(xbar)), beta = qom dt / 2, solved
/// per pass with the rotation formula; then x += vbar dt, v = 2 vbar - v.
/// Throws NonFiniteParticle with the particle index.
void particle_mover(Species& s, const FieldGrid& f, double dt, int iterations);
void particle_mover(ParticleSet& p, const FieldGrid& f, double dt, int iterations);

/// Closed-form solution of vbar = v + beta (E + vbar x B).
Eigen::Vector3d midpoint_velocity(const Eigen::Vector3d& v, const Eigen::Vector3d& e,
                                  const Eigen::Vector3d& b, double beta);

/// CIC deposition of rho, J and P into `m` (accumulates).
void deposit(const Species& s, const FieldGrid& g, SpeciesMoments& m);
Moments gather_moments(const ParticleSet& p, const FieldGrid& g);

/// Kinetic energy sum of q/qom |v|^2 / 2 over a species.
double kinetic_energy(const Species& s);

}  // namespace examini::pic
