#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Core>

#include "examini/core/comm.hpp"

namespace examini::mhd {

struct GridSpec {
  std::array<int, 3> global_cells{32, 32, 32};
  std::array<std::array<double, 2>, 3> extent{{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};
  RankLayout3 rank_layout{};
  int ghost_width = 3;
  std::array<bool, 3> periodic{true, true, true};

  double dx(int axis) const {
    return (extent[axis][1] - extent[axis][0]) / global_cells[axis];
  }
  double min_dx() const;
  /// Throws InvalidArgument when the layout does not divide the grid or the
  /// ghost width cannot hold the WENO-Z stencil.
  void validate(int ranks) const;
};

/// Index space of one rank's block: interior [0, n) plus `g` ghost layers.
struct BlockGeometry {
  std::array<int, 3> n{};       // interior cells
  std::array<int, 3> offset{};  // global index of interior cell 0
  int g = 3;

  int stride_y() const { return n[0] + 2 * g; }
  int stride_z() const { return (n[0] + 2 * g) * (n[1] + 2 * g); }
  std::size_t size() const {
    return std::size_t(n[0] + 2 * g) * (n[1] + 2 * g) * (n[2] + 2 * g);
  }
  std::ptrdiff_t index(int i, int j, int k) const {
    return (std::ptrdiff_t(k + g) * (n[1] + 2 * g) + (j + g)) *
               (n[0] + 2 * g) +
           (i + g);
  }
  std::ptrdiff_t stride(int axis) const {
    return axis == 0 ? 1 : axis == 1 ? stride_y() : stride_z();
  }
};

BlockGeometry block_geometry(const GridSpec& grid, int rank);

/// Scalar field on a ghosted block.
using BlockField = Eigen::ArrayXd;

}  // namespace examini::mhd
