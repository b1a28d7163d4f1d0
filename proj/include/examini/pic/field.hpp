#pragma once

#include <vector>

#include <Eigen/Dense>

#include "examini/pic/types.hpp"

namespace examini::pic {

/// Collocated central-difference curl on the periodic lattice (d/dz = 0).
std::array<Field, 3> curl(const FieldGrid& g, const std::array<Field, 3>& f);

/// Implicit-moment theta-scheme operator for E^{n+theta}:
///   A E = E + (theta dt)^2 curl curl E + theta dt sum_s beta_s rho_s alpha_s E
///   b   = E^n + theta dt (curl B^n - sum_s alpha_s (J_s - dt/2 div P_s))
/// with beta_s = qom_s dt / 2 and alpha_s the implicit rotation built from
/// the node field B^n. Vectors are component-major: [Ex | Ey | Ez].
class FieldOperator {
 public:
  FieldOperator(const FieldGrid& f, const Moments& m,
                const std::vector<double>& qom, double dt, double theta);

  Eigen::Index size() const { return 3 * Eigen::Index(nodes_); }
  Eigen::VectorXd apply(const Eigen::VectorXd& e) const;
  const Eigen::VectorXd& rhs() const { return rhs_; }
  /// theta dt sum_s beta_s rho_s alpha_s at node n.
  const Eigen::Matrix3d& susceptibility(std::size_t n) const { return chi_[n]; }

 private:
  const FieldGrid* grid_;
  std::size_t nodes_;
  double tdt_;
  std::vector<Eigen::Matrix3d> chi_;
  Eigen::VectorXd rhs_;
};

/// alpha = (I - beta [B]x + beta^2 B B^T) / (1 + beta^2 |B|^2).
Eigen::Matrix3d implicit_rotation(const Eigen::Vector3d& b, double beta);

Eigen::VectorXd pack_field(const std::array<Field, 3>& f);
std::array<Field, 3> unpack_field(const Eigen::VectorXd& v, std::size_t nodes);

struct FieldSolveStats {
  int iterations = 0;
  double residual = 0.0;
  bool breakdown = false;
  /// E^{n+theta}: the field the particles are pushed with.
  std::array<Field, 3> e_theta;
};

/// Solves for E^{n+theta} with GMRES (initial guess E^n), then
/// B^{n+1} = B^n - dt curl E^{n+theta} and
/// E^{n+1} = (E^{n+theta} - (1 - theta) E^n) / theta.
FieldSolveStats field_solve(FieldGrid& f, const Moments& m,
                            const std::vector<double>& qom, double dt,
                            double theta, const GmresOptions<double>& opt);

}  // namespace examini::pic
