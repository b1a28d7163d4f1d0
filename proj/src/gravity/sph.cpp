#include "examini/gravity/sph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace examini::gravity {

void SphParams::validate() const {
  if (n_ngb < 8) throw InvalidArgument("n_ngb must be >= 8");
  if (!(tolerance > 0.0)) throw InvalidArgument("hsml tolerance must be > 0");
  if (max_bisections < 1) throw InvalidArgument("max_bisections must be >= 1");
}

double kernel_w(double r, double h) {
  const double q = r / h;
  const double s = 1.0 / (std::numbers::pi * h * h * h);
  if (q < 1.0) return s * (1.0 - 1.5 * q * q + 0.75 * q * q * q);
  if (q < 2.0) {
    const double u = 2.0 - q;
    return s * 0.25 * u * u * u;
  }
  return 0.0;
}

void neighbours(const OctTree& t, std::span<const Body> bodies, const Eigen::Vector3d& x,
                double radius, std::vector<std::uint32_t>& out) {
  out.clear();
  const double r2 = radius * radius;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const TreeNode& n = t.nodes[std::size_t(stack.back())];
    stack.pop_back();
    const double d = (n.lo - x).cwiseMax(x - (n.lo.array() + n.size).matrix()).cwiseMax(0.0).norm();
    if (d > radius) continue;
    if (n.leaf) {
      for (std::uint32_t j = n.first; j < n.first + n.count; ++j)
        if ((bodies[j].pos - x).squaredNorm() < r2) out.push_back(j);
    } else {
      for (int c = 7; c >= 0; --c)
        if (n.child[std::size_t(c)] >= 0) stack.push_back(n.child[std::size_t(c)]);
    }
  }
}

namespace {

/// (4 pi / 3) h^3 sum_j W(r_ij, h); increasing in h.
double weighted_count(std::span<const Body> bodies, const std::vector<std::uint32_t>& ngb,
                      const Eigen::Vector3d& x, double h) {
  double s = 0.0;
  for (auto j : ngb) s += kernel_w((bodies[j].pos - x).norm(), h);
  return 4.0 * std::numbers::pi / 3.0 * h * h * h * s;
}

}  // namespace

std::vector<double> find_hsml(const OctTree& t, std::span<const Body> bodies,
                              const SphParams& p, std::size_t first, std::size_t count) {
  p.validate();
  if (bodies.size() <= std::size_t(p.n_ngb))
    throw InvalidArgument("find_hsml needs more than n_ngb bodies");
  if (first > bodies.size()) throw InvalidArgument("body range out of bounds");
  count = std::min(count, bodies.size() - first);
  std::vector<double> h(count);
  std::vector<std::uint32_t> ngb;
  const double target = p.n_ngb;
  for (std::size_t i = first; i < first + count; ++i) {
    const Eigen::Vector3d x = bodies[i].pos;
    // Upper bracket: grow until the weighted count exceeds the target.
    double hi = t.root().size / std::cbrt(double(bodies.size())), lo = 0.0;
    int grow = 0;
    for (;; ++grow) {
      neighbours(t, bodies, x, 2.0 * hi, ngb);
      if (weighted_count(bodies, ngb, x, hi) >= target) break;
      lo = hi;
      hi *= 2.0;
      if (grow > 60) throw NoConvergence(bodies[i].id, "no upper bracket for h");
    }
    // Lower bracket: shrink while the count stays above the target.
    if (lo == 0.0) {
      lo = 0.5 * hi;
      for (int k = 0;; ++k) {
        neighbours(t, bodies, x, 2.0 * lo, ngb);
        if (weighted_count(bodies, ngb, x, lo) < target) break;
        hi = lo;
        lo *= 0.5;
        if (k > 60) throw NoConvergence(bodies[i].id, "no lower bracket for h");
      }
    }
    neighbours(t, bodies, x, 2.0 * hi, ngb);
    int it = 0;
    while ((hi - lo) > p.tolerance * hi) {
      if (++it > p.max_bisections)
        throw NoConvergence(bodies[i].id, "bisection did not converge after " +
                                              std::to_string(p.max_bisections) + " steps");
      const double mid = 0.5 * (lo + hi);
      if (weighted_count(bodies, ngb, x, mid) >= target)
        hi = mid;
      else
        lo = mid;
    }
    h[i - first] = 0.5 * (lo + hi);
  }
  return h;
}

std::vector<double> sph_density(const OctTree& t, std::span<const Body> bodies,
                                std::span<const double> h, std::size_t first) {
  if (first + h.size() > bodies.size()) throw InvalidArgument("one smoothing length per body");
  std::vector<double> rho(h.size());
  std::vector<std::uint32_t> ngb;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const Eigen::Vector3d x = bodies[first + k].pos;
    neighbours(t, bodies, x, 2.0 * h[k], ngb);
    double s = 0.0;
    for (auto j : ngb) s += bodies[j].mass * kernel_w((bodies[j].pos - x).norm(), h[k]);
    rho[k] = s;
  }
  return rho;
}

}  // namespace examini::gravity
