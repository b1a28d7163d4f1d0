#include "examini/mhd/halo.hpp"

#include <vector>

namespace examini::mhd {

namespace {

struct Range {
  int lo, hi;
};

Range send_range(int o, int n, int g) {
  return o < 0 ? Range{0, g} : o > 0 ? Range{n - g, n} : Range{0, n};
}

Range ghost_range(int o, int n, int g) {
  return o < 0 ? Range{-g, 0} : o > 0 ? Range{n, n + g} : Range{0, n};
}

int direction_tag(std::array<int, 3> o) {
  return (o[0] + 1) + 3 * (o[1] + 1) + 9 * (o[2] + 1);
}

template <typename Fn>
void for_box(const std::array<Range, 3>& r, Fn&& fn) {
  for (int k = r[2].lo; k < r[2].hi; ++k)
    for (int j = r[1].lo; j < r[1].hi; ++j)
      for (int i = r[0].lo; i < r[0].hi; ++i) fn(i, j, k);
}

}  // namespace

void halo_exchange(Communicator* comm, const GridSpec& grid,
                   const BlockGeometry& geo,
                   std::span<BlockField* const> fields) {
  const int g = geo.g;
  const auto& n = geo.n;
  const int rank = comm ? comm->rank() : 0;
  if (!comm && grid.rank_layout.size() != 1)
    throw InvalidArgument("halo_exchange without a communicator needs one rank");
  std::vector<std::array<int, 3>> offsets;
  for (int oz = -1; oz <= 1; ++oz)
    for (int oy = -1; oy <= 1; ++oy)
      for (int ox = -1; ox <= 1; ++ox)
        if (ox || oy || oz) offsets.push_back({ox, oy, oz});

  // Post every send first.
  for (const auto& o : offsets) {
    const auto peer = grid.rank_layout.neighbor(rank, o, grid.periodic);
    if (!peer || *peer == rank) continue;
    const std::array<Range, 3> box{send_range(o[0], n[0], g),
                                   send_range(o[1], n[1], g),
                                   send_range(o[2], n[2], g)};
    std::vector<double> buf;
    buf.reserve(fields.size() * std::size_t(box[0].hi - box[0].lo) *
                (box[1].hi - box[1].lo) * (box[2].hi - box[2].lo));
    for (const BlockField* f : fields)
      for_box(box, [&](int i, int j, int k) {
        buf.push_back((*f)[geo.index(i, j, k)]);
      });
    comm->send_values<double>(*peer, direction_tag(o), buf);
  }

  for (const auto& o : offsets) {
    const auto peer = grid.rank_layout.neighbor(rank, o, grid.periodic);
    if (!peer) continue;
    const std::array<Range, 3> box{ghost_range(o[0], n[0], g),
                                   ghost_range(o[1], n[1], g),
                                   ghost_range(o[2], n[2], g)};
    if (*peer == rank) {
      // Periodic wrap onto ourselves: ghost side o mirrors interior side -o.
      const std::array<int, 3> shift{-o[0] * n[0], -o[1] * n[1], -o[2] * n[2]};
      for (BlockField* f : fields)
        for_box(box, [&](int i, int j, int k) {
          (*f)[geo.index(i, j, k)] =
              (*f)[geo.index(i + shift[0], j + shift[1], k + shift[2])];
        });
      continue;
    }
    const std::array<int, 3> back{-o[0], -o[1], -o[2]};
    const auto buf = comm->recv_values<double>(*peer, direction_tag(back));
    std::size_t p = 0;
    for (BlockField* f : fields)
      for_box(box, [&](int i, int j, int k) {
        (*f)[geo.index(i, j, k)] = buf.at(p++);
      });
  }

  // Zero-gradient fill on open domain boundaries, axis by axis.
  const auto coords = grid.rank_layout.coords_of(rank);
  const std::array<int, 3> dims{grid.rank_layout.px, grid.rank_layout.py,
                                grid.rank_layout.pz};
  for (int a = 0; a < 3; ++a) {
    if (grid.periodic[a]) continue;
    std::array<Range, 3> full{Range{-g, n[0] + g}, Range{-g, n[1] + g},
                              Range{-g, n[2] + g}};
    for (int side : {-1, 1}) {
      if ((side < 0 && coords[a] != 0) || (side > 0 && coords[a] != dims[a] - 1))
        continue;
      auto box = full;
      box[a] = ghost_range(side, n[a], g);
      for (BlockField* f : fields)
        for_box(box, [&](int i, int j, int k) {
          std::array<int, 3> src{i, j, k};
          src[a] = side < 0 ? 0 : n[a] - 1;
          (*f)[geo.index(i, j, k)] = (*f)[geo.index(src[0], src[1], src[2])];
        });
    }
  }
}

}  // namespace examini::mhd
