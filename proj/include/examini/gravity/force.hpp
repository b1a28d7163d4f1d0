#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "examini/gravity/tree.hpp"

namespace examini::gravity {

struct WalkParams {
  double theta = 0.5;          // opening angle
  double softening = 1e-3;     // Plummer epsilon
  int group_size = 32;         // bodies per Hilbert-contiguous group
  double direct_radius = 0.0;  // nodes closer than this to a group are resolved

  /// Throws InvalidArgument.
  void validate() const;
};

/// O(n^2) softened sum with G = 1; inactive bodies still act as sources.
Accels direct_sum(std::span<const Body> bodies, double softening);

/// Per-body interaction counts of a walk: accepted monopoles plus bodies
/// summed directly in opened leaves.
struct WalkStats {
  std::uint64_t interactions = 0;
  std::uint64_t node_visits = 0;
};

/// Classic Barnes-Hut walk per active body: a node is opened when it holds
/// the body or when size > theta * |com - x|. Inactive bodies get zero.
Accels bh_force(const OctTree& t, std::span<const Body> bodies, const WalkParams& p,
                WalkStats* stats = nullptr);

struct GroupStats {
  std::uint32_t first = 0, count = 0;  // member range (active bodies only)
  std::uint64_t list_length = 0;       // shared interaction list entries
  std::uint64_t member_classic_sum = 0;  // sum of classic per-member list lengths
};

struct GroupedWalkStats {
  bool count_classic = false;  // also fill member_classic_sum (extra walks)
  std::vector<GroupStats> groups;
  std::uint64_t interactions = 0;  // sum over members of list entries applied
};

/// Grouped walk: consecutive active bodies form groups of `group_size`;
/// each group builds one interaction list against its bounding box,
/// opening a node whenever any member could open it (box intersection,
/// size > theta * box distance, or box distance < direct_radius).
/// Per-group classic list lengths are counted when stats->count_classic.
Accels grouped_walk_force(const OctTree& t, std::span<const Body> bodies,
                          const WalkParams& p, GroupedWalkStats* stats = nullptr);

/// |a - ref| / |ref| per body (0 where both vanish).
std::vector<double> relative_errors(const Accels& a, const Accels& ref);

}  // namespace examini::gravity
