#include "examini/gravity/hilbert.hpp"

#include <cmath>
#include <string>

namespace examini::gravity {

namespace {

void check_order(int order) {
  if (order < 1 || order > kMaxHilbertOrder)
    throw InvalidArgument("hilbert order must lie in [1, 21], got " + std::to_string(order));
}

}  // namespace

std::array<std::uint32_t, 3> cell_coords(const Eigen::Vector3d& x, const Domain& d, int order) {
  check_order(order);
  if (!(d.size > 0.0) || !std::isfinite(d.size)) throw DegenerateDomain("domain size must be positive");
  if (!x.allFinite() || !d.contains(x))
    throw OutOfDomain("point (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) + ", " +
                      std::to_string(x[2]) + ") lies outside the domain");
  const double cells = std::ldexp(1.0, order);
  std::array<std::uint32_t, 3> c{};
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((x[a] - d.lo[a]) / d.size * cells);
    c[std::size_t(a)] = std::uint32_t(std::min(f, cells - 1.0));
  }
  return c;
}

std::uint64_t hilbert_index(std::array<std::uint32_t, 3> x, int order) {
  check_order(order);
  const std::uint32_t m = 1u << (order - 1);
  // Inverse undo.
  for (std::uint32_t q = m; q > 1; q >>= 1) {
    const std::uint32_t p = q - 1;
    for (int i = 0; i < 3; ++i) {
      if (x[std::size_t(i)] & q) {
        x[0] ^= p;
      } else {
        const std::uint32_t t = (x[0] ^ x[std::size_t(i)]) & p;
        x[0] ^= t;
        x[std::size_t(i)] ^= t;
      }
    }
  }
  // Gray encode.
  x[1] ^= x[0];
  x[2] ^= x[1];
  std::uint32_t t = 0;
  for (std::uint32_t q = m; q > 1; q >>= 1)
    if (x[2] & q) t ^= q - 1;
  for (auto& v : x) v ^= t;

  std::uint64_t key = 0;
  for (int b = order - 1; b >= 0; --b)
    for (int i = 0; i < 3; ++i) key = (key << 1) | ((x[std::size_t(i)] >> b) & 1u);
  return key;
}

std::uint64_t hilbert_key(const Eigen::Vector3d& x, const Domain& d, int order) {
  return hilbert_index(cell_coords(x, d, order), order);
}

}  // namespace examini::gravity
