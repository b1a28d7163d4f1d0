#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

#include "examini/core/error.hpp"

namespace examini::gravity {

EXAMINI_DEFINE_ERROR(OutOfDomain);
EXAMINI_DEFINE_ERROR(DegenerateDomain);

/// Axis-aligned cube [lo, lo + size]^3.
struct Domain {
  Eigen::Vector3d lo = Eigen::Vector3d::Zero();
  double size = 1.0;

  bool contains(const Eigen::Vector3d& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= lo.array() + size).all();
  }
};

inline constexpr int kMaxHilbertOrder = 21;

/// Integer cell coordinates of `x` at `order` bits per axis; a point on the
/// upper face belongs to the last cell. Throws OutOfDomain.
std::array<std::uint32_t, 3> cell_coords(const Eigen::Vector3d& x, const Domain& d, int order);

/// Hilbert index of integer cell coordinates (Skilling's transpose form).
std::uint64_t hilbert_index(std::array<std::uint32_t, 3> cell, int order);

/// Hilbert index of the cell containing `x`.
std::uint64_t hilbert_key(const Eigen::Vector3d& x, const Domain& d, int order);

}  // namespace examini::gravity
