#include "examini/gravity/tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace examini::gravity {

namespace {

struct Builder {
  std::vector<Body>& bodies;
  std::vector<std::array<std::uint32_t, 3>> cells;
  OctTree& tree;

  std::int32_t build(std::uint32_t first, std::uint32_t count, Eigen::Vector3d lo,
                     double size, int level) {
    const auto id = std::int32_t(tree.nodes.size());
    tree.nodes.emplace_back();
    {
      TreeNode& n = tree.nodes.back();
      n.lo = lo;
      n.size = size;
      n.first = first;
      n.count = count;
      n.level = level;
    }
    if (int(count) <= tree.leaf_capacity || level == kMaxHilbertOrder) {
      double m = 0.0;
      Eigen::Vector3d mx = Eigen::Vector3d::Zero();
      for (std::uint32_t i = first; i < first + count; ++i) {
        m += bodies[i].mass;
        mx += bodies[i].mass * bodies[i].pos;
      }
      tree.nodes[std::size_t(id)].mass = m;
      tree.nodes[std::size_t(id)].com = mx / m;
      return id;
    }
    const int shift = 3 * (kMaxHilbertOrder - 1 - level);
    const int bit = kMaxHilbertOrder - 1 - level;
    std::array<std::int32_t, 8> child{-1, -1, -1, -1, -1, -1, -1, -1};
    double m = 0.0;
    Eigen::Vector3d mx = Eigen::Vector3d::Zero();
    std::uint32_t i = first;
    int slot = 0;
    while (i < first + count) {
      const auto digit = (bodies[i].key >> shift) & 7u;
      std::uint32_t j = i + 1;
      while (j < first + count && ((bodies[j].key >> shift) & 7u) == digit) ++j;
      const auto& c = cells[i];
      const Eigen::Vector3d clo =
          lo + 0.5 * size *
                   Eigen::Vector3d((c[0] >> bit) & 1u, (c[1] >> bit) & 1u, (c[2] >> bit) & 1u);
      const auto k = build(i, j - i, clo, 0.5 * size, level + 1);
      child[std::size_t(slot++)] = k;
      m += tree.nodes[std::size_t(k)].mass;
      mx += tree.nodes[std::size_t(k)].mass * tree.nodes[std::size_t(k)].com;
      i = j;
    }
    TreeNode& n = tree.nodes[std::size_t(id)];
    n.child = child;
    n.leaf = false;
    n.mass = m;
    n.com = mx / m;
    return id;
  }
};

}  // namespace

Domain bounding_cube(std::span<const Body> bodies, double pad) {
  if (bodies.empty()) throw DegenerateDomain("no bodies");
  Eigen::Vector3d lo = bodies.front().pos, hi = lo;
  for (const auto& b : bodies) {
    lo = lo.cwiseMin(b.pos);
    hi = hi.cwiseMax(b.pos);
  }
  double size = (hi - lo).maxCoeff();
  if (size == 0.0) size = std::max(1.0, lo.cwiseAbs().maxCoeff()) * 1e-6;
  const double p = pad * size;
  return {lo.array() - p, size + 2 * p};
}

OctTree build_tree(std::vector<Body>& bodies, const Domain& domain, int leaf_capacity) {
  if (!(domain.size > 0.0) || !std::isfinite(domain.size))
    throw DegenerateDomain("domain has zero extent");
  if (leaf_capacity < 1) throw InvalidArgument("leaf capacity must be >= 1");
  if (bodies.empty()) throw InvalidArgument("cannot build a tree without bodies");
  for (const auto& b : bodies)
    if (!(b.mass > 0.0)) throw InvalidArgument("body " + std::to_string(b.id) + " has mass <= 0");

  std::vector<std::array<std::uint32_t, 3>> cells(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    cells[i] = cell_coords(bodies[i].pos, domain, kMaxHilbertOrder);
    bodies[i].key = hilbert_index(cells[i], kMaxHilbertOrder);
  }
  std::vector<std::size_t> order(bodies.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return bodies[a].key < bodies[b].key; });
  std::vector<Body> sorted(bodies.size());
  std::vector<std::array<std::uint32_t, 3>> sorted_cells(bodies.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted[k] = bodies[order[k]];
    sorted_cells[k] = cells[order[k]];
  }
  bodies = std::move(sorted);

  OctTree t;
  t.domain = domain;
  t.leaf_capacity = leaf_capacity;
  t.nodes.reserve(2 * bodies.size() / std::size_t(leaf_capacity) + 16);
  Builder b{bodies, std::move(sorted_cells), t};
  b.build(0, std::uint32_t(bodies.size()), domain.lo, domain.size, 0);
  return t;
}

std::int32_t OctTree::leaf_of(std::size_t i) const {
  std::int32_t n = 0;
  while (!nodes[std::size_t(n)].leaf) {
    std::int32_t next = -1;
    for (auto c : nodes[std::size_t(n)].child) {
      if (c < 0) break;
      const auto& cn = nodes[std::size_t(c)];
      if (i >= cn.first && i < cn.first + cn.count) next = c;
    }
    if (next < 0) return -1;
    n = next;
  }
  const auto& l = nodes[std::size_t(n)];
  return i >= l.first && i < l.first + l.count ? n : -1;
}

std::int32_t OctTree::find_leaf(const Eigen::Vector3d& x) const {
  if (!root().contains(x)) return -1;
  std::int32_t n = 0;
  while (!nodes[std::size_t(n)].leaf) {
    std::int32_t next = -1;
    for (auto c : nodes[std::size_t(n)].child)
      if (c >= 0 && nodes[std::size_t(c)].contains(x)) {
        next = c;
        break;
      }
    if (next < 0) return -1;
    n = next;
  }
  return n;
}

std::vector<std::string> audit_tree(const OctTree& t, std::span<const Body> bodies) {
  std::vector<std::string> bad;
  std::vector<int> seen(bodies.size(), 0);
  for (std::size_t k = 0; k < t.nodes.size(); ++k) {
    const auto& n = t.nodes[k];
    const std::string tag = "node " + std::to_string(k);
    const double tol = 1e-12 * n.size;
    if (((n.com.array() < n.lo.array() - tol) || (n.com.array() > n.lo.array() + n.size + tol))
            .any())
      bad.push_back(tag + ": center of mass outside the box");
    if (n.leaf) {
      for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
        ++seen[i];
        if (!n.contains(bodies[i].pos))
          bad.push_back(tag + ": body " + std::to_string(i) + " outside its leaf");
      }
      continue;
    }
    double m = 0.0;
    std::uint32_t cnt = 0;
    for (auto c : n.child)
      if (c >= 0) {
        m += t.nodes[std::size_t(c)].mass;
        cnt += t.nodes[std::size_t(c)].count;
      }
    if (std::abs(m - n.mass) > 1e-12 * n.mass) bad.push_back(tag + ": mass closure violated");
    if (cnt != n.count) bad.push_back(tag + ": child ranges do not cover the node");
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] != 1)
      bad.push_back("body " + std::to_string(i) + " appears in " + std::to_string(seen[i]) +
                    " leaves");
  return bad;
}

}  // namespace examini::gravity
