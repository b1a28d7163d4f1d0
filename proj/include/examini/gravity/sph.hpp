#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "examini/gravity/tree.hpp"

namespace examini::gravity {

struct SphParams {
  int n_ngb = 32;            // target neighbour count
  double tolerance = 1e-6;   // relative bracket width on h
  int max_bisections = 200;

  void validate() const;
};

/// No bracket or no convergence for the smoothing length of a body.
class NoConvergence : public Error {
 public:
  NoConvergence(std::uint64_t body, const std::string& what)
      : Error("NoConvergence", "body " + std::to_string(body) + ": " + what), body_(body) {}
  std::uint64_t body() const { return body_; }

 private:
  std::uint64_t body_;
};

/// Cubic-spline (M4) kernel with support 2h, normalised to unit integral.
double kernel_w(double r, double h);

/// Indices of bodies within `radius` of `x` (tree range search).
void neighbours(const OctTree& t, std::span<const Body> bodies, const Eigen::Vector3d& x,
                double radius, std::vector<std::uint32_t>& out);

/// Smoothing lengths solving (4 pi / 3) h^3 sum_j W(r_ij, h) = n_ngb by
/// bisection (self included in the sum), for bodies [first, first + count);
/// count defaults to the rest of the set.
std::vector<double> find_hsml(const OctTree& t, std::span<const Body> bodies,
                              const SphParams& p, std::size_t first = 0,
                              std::size_t count = std::size_t(-1));

/// rho_i = sum_j m_j W(r_ij, h_i), self included, for bodies
/// [first, first + h.size()).
std::vector<double> sph_density(const OctTree& t, std::span<const Body> bodies,
                                std::span<const double> h, std::size_t first = 0);

}  // namespace examini::gravity
