#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "examini/core/error.hpp"
#include "examini/pic/gmres.hpp"

namespace examini::pic {

using Field = Eigen::ArrayXd;

/// Macro-particles of one species. `q` is the signed charge carried by
/// each macro-particle; its mass is q / qom.
struct Species {
  std::string name;
  double qom = -1.0;
  Eigen::ArrayXd x, y, vx, vy, vz, q;
  std::vector<std::uint64_t> id;  // stable across ranks and migration

  std::size_t size() const { return std::size_t(x.size()); }
  void resize(std::size_t n);
  void append(const Species& other);
};

struct ParticleSet {
  std::vector<Species> species;

  std::size_t total() const;
};

/// Periodic node lattice: nodes (i, j) for i in [0, nx), j in [0, ny);
/// node nx aliases node 0 (likewise in y), so only unique nodes are stored.
struct FieldGrid {
  int nx = 0, ny = 0;
  double dx = 1.0, dy = 1.0;
  std::array<Field, 3> E, B;

  FieldGrid() = default;
  FieldGrid(int nx, int ny, double dx, double dy);

  double lx() const { return nx * dx; }
  double ly() const { return ny * dy; }
  double node_volume() const { return dx * dy; }
  std::size_t nodes() const { return std::size_t(nx) * ny; }
  std::size_t node(int i, int j) const {
    i %= nx;
    j %= ny;
    if (i < 0) i += nx;
    if (j < 0) j += ny;
    return std::size_t(j) * nx + i;
  }
  /// 0.5 * sum over nodes of (E^2 + B^2) * node volume.
  double energy() const;
};

/// Per-species node moments: charge density rho, current J and the
/// charge-weighted velocity tensor P (xx, xy, xz, yy, yz, zz).
struct SpeciesMoments {
  Field rho;
  std::array<Field, 3> J;
  std::array<Field, 6> P;
};

struct Moments {
  std::vector<SpeciesMoments> species;

  Moments() = default;
  Moments(std::size_t nspecies, std::size_t nodes);
  /// Flat copy of every array, species-major (for reductions).
  std::vector<double> flatten() const;
  void assign(const std::vector<double>& flat);
};

struct SpeciesConfig {
  std::string name = "electrons";
  double qom = -1.0;
  double density = 1.0;  // |charge density|; the sign follows qom
  double vth = 0.1;
  std::array<double, 3> drift{0.0, 0.0, 0.0};
  int ppc_x = 4, ppc_y = 4;
};

struct PicConfig {
  int nx = 32, ny = 32;
  double lx = 8.0, ly = 8.0;
  double dt = 0.1;
  double theta = 0.5;
  int mover_iterations = 3;
  GmresOptions<double> gmres{1e-8, 20, 2000};
  std::vector<SpeciesConfig> species{
      SpeciesConfig{"electrons", -1.0, 1.0, 0.1, {0, 0, 0}, 4, 4},
      SpeciesConfig{"ions", 1.0 / 25.0, 1.0, 0.02, {0, 0, 0}, 4, 4}};
  std::array<double, 3> b0{0.0, 0.0, 0.0};  // uniform background field
  bool quiet_start = true;
  std::uint64_t seed = 1;
  int cycles = 10;

  double dx() const { return lx / nx; }
  double dy() const { return ly / ny; }
  /// Light-wave stability limit of an explicit 2D leapfrog on this grid.
  double explicit_cfl_dt() const;
  /// Throws InvalidArgument.
  void validate(int ranks) const;
};

EXAMINI_DEFINE_ERROR(NonFiniteParticle);

}  // namespace examini::pic
