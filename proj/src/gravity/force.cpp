#include "examini/gravity/force.hpp"

#include <cmath>
#include <string>

namespace examini::gravity {

namespace {

inline void accumulate(Eigen::Vector3d& a, const Eigen::Vector3d& x, const Eigen::Vector3d& src,
                       double m, double eps2) {
  const Eigen::Vector3d d = src - x;
  const double r2 = d.squaredNorm() + eps2;
  a += (m / (r2 * std::sqrt(r2))) * d;
}

/// Distance from `x` to the box [lo, hi] (0 inside).
double box_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& lo,
                    const Eigen::Vector3d& hi) {
  return (lo - x).cwiseMax(x - hi).cwiseMax(0.0).norm();
}

double box_box_distance(const Eigen::Vector3d& alo, const Eigen::Vector3d& ahi,
                        const Eigen::Vector3d& blo, const Eigen::Vector3d& bhi) {
  return (alo - bhi).cwiseMax(blo - ahi).cwiseMax(0.0).norm();
}

bool boxes_intersect(const Eigen::Vector3d& alo, const Eigen::Vector3d& ahi,
                     const Eigen::Vector3d& blo, const Eigen::Vector3d& bhi) {
  return (alo.array() <= bhi.array()).all() && (blo.array() <= ahi.array()).all();
}

struct ClassicWalk {
  const OctTree& t;
  std::span<const Body> bodies;
  double theta, eps2;
  std::size_t self;
  Eigen::Vector3d x;
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  std::uint64_t interactions = 0, visits = 0;
  bool count_only = false;

  void walk(std::int32_t k) {
    const TreeNode& n = t.nodes[std::size_t(k)];
    ++visits;
    const bool open = n.contains(x) || n.size > theta * (n.com - x).norm();
    if (!open) {
      ++interactions;
      if (!count_only) accumulate(a, x, n.com, n.mass, eps2);
    } else if (n.leaf) {
      for (std::uint32_t j = n.first; j < n.first + n.count; ++j) {
        if (j == self) continue;
        ++interactions;
        if (!count_only) accumulate(a, x, bodies[j].pos, bodies[j].mass, eps2);
      }
    } else {
      for (auto c : n.child)
        if (c >= 0) walk(c);
    }
  }
};

/// Interaction list entries: >= 0 a monopole node, < 0 an opened leaf
/// encoded as -1 - node.
struct GroupList {
  const OctTree& t;
  double theta, radius;
  Eigen::Vector3d lo, hi;
  std::vector<std::int32_t> entries;
  std::uint64_t length = 0;

  void walk(std::int32_t k) {
    const TreeNode& n = t.nodes[std::size_t(k)];
    const Eigen::Vector3d nhi = n.lo.array() + n.size;
    const bool open = boxes_intersect(n.lo, nhi, lo, hi) ||
                      n.size > theta * box_distance(n.com, lo, hi) ||
                      (radius > 0.0 && box_box_distance(n.lo, nhi, lo, hi) < radius);
    if (!open) {
      entries.push_back(k);
      ++length;
    } else if (n.leaf) {
      entries.push_back(-1 - k);
      length += n.count;
    } else {
      for (auto c : n.child)
        if (c >= 0) walk(c);
    }
  }
};

}  // namespace

void WalkParams::validate() const {
  if (!(theta >= 0.0)) throw InvalidArgument("theta must be >= 0");
  if (!(softening > 0.0)) throw InvalidArgument("softening must be > 0");
  if (group_size < 1) throw InvalidArgument("group_size must be >= 1");
  if (!(direct_radius >= 0.0)) throw InvalidArgument("direct_radius must be >= 0");
}

Accels direct_sum(std::span<const Body> bodies, double softening) {
  const double eps2 = softening * softening;
  Accels a(bodies.size(), Eigen::Vector3d::Zero());
  for (std::size_t i = 0; i < bodies.size(); ++i)
    for (std::size_t j = 0; j < bodies.size(); ++j)
      if (j != i) accumulate(a[i], bodies[i].pos, bodies[j].pos, bodies[j].mass, eps2);
  return a;
}

Accels bh_force(const OctTree& t, std::span<const Body> bodies, const WalkParams& p,
                WalkStats* stats) {
  p.validate();
  Accels out(bodies.size(), Eigen::Vector3d::Zero());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    if (!bodies[i].active) continue;
    ClassicWalk w{t, bodies, p.theta, p.softening * p.softening, i, bodies[i].pos};
    w.walk(0);
    out[i] = w.a;
    if (stats) {
      stats->interactions += w.interactions;
      stats->node_visits += w.visits;
    }
  }
  return out;
}

Accels grouped_walk_force(const OctTree& t, std::span<const Body> bodies, const WalkParams& p,
                          GroupedWalkStats* stats) {
  p.validate();
  const double eps2 = p.softening * p.softening;
  Accels out(bodies.size(), Eigen::Vector3d::Zero());
  std::vector<std::uint32_t> active;
  for (std::uint32_t i = 0; i < bodies.size(); ++i)
    if (bodies[i].active) active.push_back(i);

  for (std::size_t g0 = 0; g0 < active.size(); g0 += std::size_t(p.group_size)) {
    const std::size_t g1 = std::min(active.size(), g0 + std::size_t(p.group_size));
    Eigen::Vector3d lo = bodies[active[g0]].pos, hi = lo;
    for (std::size_t m = g0; m < g1; ++m) {
      lo = lo.cwiseMin(bodies[active[m]].pos);
      hi = hi.cwiseMax(bodies[active[m]].pos);
    }
    GroupList list{t, p.theta, p.direct_radius, lo, hi, {}};
    list.walk(0);

    std::uint64_t applied = 0;
    for (std::size_t m = g0; m < g1; ++m) {
      const std::uint32_t i = active[m];
      const Eigen::Vector3d x = bodies[i].pos;
      Eigen::Vector3d a = Eigen::Vector3d::Zero();
      for (const auto e : list.entries) {
        if (e >= 0) {
          const TreeNode& n = t.nodes[std::size_t(e)];
          accumulate(a, x, n.com, n.mass, eps2);
          ++applied;
          continue;
        }
        const TreeNode& n = t.nodes[std::size_t(-1 - e)];
        for (std::uint32_t j = n.first; j < n.first + n.count; ++j) {
          if (j == i) continue;
          accumulate(a, x, bodies[j].pos, bodies[j].mass, eps2);
          ++applied;
        }
      }
      out[i] = a;
    }
    if (stats) {
      GroupStats gs{active[g0], std::uint32_t(g1 - g0), list.length, 0};
      for (std::size_t m = g0; m < g1 && stats->count_classic; ++m) {
        ClassicWalk w{t, bodies, p.theta, eps2, active[m], bodies[active[m]].pos};
        w.count_only = true;
        w.walk(0);
        gs.member_classic_sum += w.interactions;
      }
      stats->groups.push_back(gs);
      stats->interactions += applied;
    }
  }
  return out;
}

std::vector<double> relative_errors(const Accels& a, const Accels& ref) {
  if (a.size() != ref.size()) throw InvalidArgument("acceleration sets differ in size");
  std::vector<double> e(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = ref[i].norm(), d = (a[i] - ref[i]).norm();
    e[i] = r > 0.0 ? d / r : d;
  }
  return e;
}

}  // namespace examini::gravity
