#include "examini/mhd/grid.hpp"

#include <algorithm>
#include <string>

namespace examini::mhd {

double GridSpec::min_dx() const { return std::min({dx(0), dx(1), dx(2)}); }

void GridSpec::validate(int ranks) const {
  if (rank_layout.size() != ranks)
    throw InvalidArgument("rank layout " + std::to_string(rank_layout.px) + "x" +
                          std::to_string(rank_layout.py) + "x" +
                          std::to_string(rank_layout.pz) + " does not match " +
                          std::to_string(ranks) + " ranks");
  if (ghost_width < 3)
    throw InvalidArgument("ghost_width must be >= 3 for WENO-Z");
  const std::array<int, 3> p{rank_layout.px, rank_layout.py, rank_layout.pz};
  for (int a = 0; a < 3; ++a) {
    if (global_cells[a] <= 0)
      throw InvalidArgument("global_cells must be positive");
    if (!(extent[a][1] > extent[a][0]))
      throw InvalidArgument("extent must satisfy lo < hi");
    if (global_cells[a] % p[a] != 0)
      throw InvalidArgument("axis " + std::to_string(a) + ": " +
                            std::to_string(global_cells[a]) +
                            " cells not divisible by " + std::to_string(p[a]));
    if (global_cells[a] / p[a] < ghost_width)
      throw InvalidArgument("axis " + std::to_string(a) +
                            ": block thinner than the ghost width");
  }
}

BlockGeometry block_geometry(const GridSpec& grid, int rank) {
  const auto c = grid.rank_layout.coords_of(rank);
  const std::array<int, 3> p{grid.rank_layout.px, grid.rank_layout.py,
                             grid.rank_layout.pz};
  BlockGeometry geo;
  geo.g = grid.ghost_width;
  for (int a = 0; a < 3; ++a) {
    geo.n[a] = grid.global_cells[a] / p[a];
    geo.offset[a] = c[a] * geo.n[a];
  }
  return geo;
}

}  // namespace examini::mhd
