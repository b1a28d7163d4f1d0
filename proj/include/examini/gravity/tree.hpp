#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "examini/gravity/hilbert.hpp"

namespace examini::gravity {

struct Body {
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel = Eigen::Vector3d::Zero();
  double mass = 1.0;
  bool active = true;
  std::uint64_t key = 0;  // Hilbert key at kMaxHilbertOrder, set by build_tree
  std::uint64_t id = 0;
};

using Accels = std::vector<Eigen::Vector3d>;

struct TreeNode {
  Eigen::Vector3d lo = Eigen::Vector3d::Zero();
  double size = 0.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  double mass = 0.0;
  std::array<std::int32_t, 8> child{-1, -1, -1, -1, -1, -1, -1, -1};
  std::uint32_t first = 0, count = 0;  // body range in Hilbert order
  int level = 0;
  bool leaf = true;

  bool contains(const Eigen::Vector3d& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= lo.array() + size).all();
  }
};

/// Nodes in depth-first order; node 0 is the root.
struct OctTree {
  Domain domain;
  int leaf_capacity = 8;
  std::vector<TreeNode> nodes;

  const TreeNode& root() const { return nodes.front(); }
  /// Leaf whose body range holds body `i`.
  std::int32_t leaf_of(std::size_t i) const;
  /// Leaf whose box contains `x` (descending by geometry).
  std::int32_t find_leaf(const Eigen::Vector3d& x) const;
};

/// Smallest cube holding every body, padded by `pad` of its extent.
Domain bounding_cube(std::span<const Body> bodies, double pad = 1e-9);

/// Sorts `bodies` by Hilbert key and builds the tree over contiguous key
/// ranges. Throws DegenerateDomain, OutOfDomain, InvalidArgument.
OctTree build_tree(std::vector<Body>& bodies, const Domain& domain, int leaf_capacity = 8);

/// Mass closure, containment and leaf coverage checks; returns the list
/// of violations (empty when the tree is sound).
std::vector<std::string> audit_tree(const OctTree& t, std::span<const Body> bodies);

}  // namespace examini::gravity
