#pragma once

#include <span>

#include "examini/core/comm.hpp"
#include "examini/mhd/grid.hpp"

namespace examini::mhd {

/// Fills the ghost layers of `fields` from the 26 neighbour blocks (periodic
/// wrap where configured, zero-gradient copy at open boundaries). All sends
/// are posted before the first receive. Periodic self-neighbours are copied
/// locally, so `comm` may be null for a single-rank layout.
void halo_exchange(Communicator* comm, const GridSpec& grid,
                   const BlockGeometry& geo, std::span<BlockField* const> fields);

inline void halo_exchange(Communicator& comm, const GridSpec& grid,
                          const BlockGeometry& geo,
                          std::span<BlockField* const> fields) {
  halo_exchange(&comm, grid, geo, fields);
}

}  // namespace examini::mhd
