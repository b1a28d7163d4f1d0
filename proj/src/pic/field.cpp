#include "examini/pic/field.hpp"

namespace examini::pic {

namespace {

Field ddx(const FieldGrid& g, const Field& f) {
  Field out(f.size());
  const double s = 0.5 / g.dx;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out[Eigen::Index(g.node(i, j))] =
          s * (f[Eigen::Index(g.node(i + 1, j))] - f[Eigen::Index(g.node(i - 1, j))]);
  return out;
}

Field ddy(const FieldGrid& g, const Field& f) {
  Field out(f.size());
  const double s = 0.5 / g.dy;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out[Eigen::Index(g.node(i, j))] =
          s * (f[Eigen::Index(g.node(i, j + 1))] - f[Eigen::Index(g.node(i, j - 1))]);
  return out;
}

// Rows (x, y) of the symmetric tensor P stored as xx, xy, xz, yy, yz, zz.
constexpr int kPx[3] = {0, 1, 2};
constexpr int kPy[3] = {1, 3, 4};

}  // namespace

std::array<Field, 3> curl(const FieldGrid& g, const std::array<Field, 3>& f) {
  return {ddy(g, f[2]), Field(-ddx(g, f[2])), Field(ddx(g, f[1]) - ddy(g, f[0]))};
}

Eigen::Matrix3d implicit_rotation(const Eigen::Vector3d& b, double beta) {
  Eigen::Matrix3d cross;
  cross << 0, -b[2], b[1], b[2], 0, -b[0], -b[1], b[0], 0;
  return (Eigen::Matrix3d::Identity() - beta * cross + beta * beta * b * b.transpose()) /
         (1.0 + beta * beta * b.squaredNorm());
}

Eigen::VectorXd pack_field(const std::array<Field, 3>& f) {
  const auto n = f[0].size();
  Eigen::VectorXd v(3 * n);
  for (int c = 0; c < 3; ++c) v.segment(c * n, n) = f[std::size_t(c)].matrix();
  return v;
}

std::array<Field, 3> unpack_field(const Eigen::VectorXd& v, std::size_t nodes) {
  const auto n = Eigen::Index(nodes);
  return {v.segment(0, n).array(), v.segment(n, n).array(), v.segment(2 * n, n).array()};
}

FieldOperator::FieldOperator(const FieldGrid& f, const Moments& m,
                             const std::vector<double>& qom, double dt, double theta)
    : grid_(&f), nodes_(f.nodes()), tdt_(theta * dt), chi_(nodes_, Eigen::Matrix3d::Zero()) {
  if (qom.size() != m.species.size())
    throw InvalidArgument("one qom per species is required");
  const auto n = Eigen::Index(nodes_);
  const auto cb = curl(f, f.B);
  std::array<Field, 3> src{Field::Zero(n), Field::Zero(n), Field::Zero(n)};
  for (std::size_t s = 0; s < qom.size(); ++s) {
    const auto& ms = m.species[s];
    const double beta = 0.5 * qom[s] * dt;
    std::array<Field, 3> jhat;
    for (int a = 0; a < 3; ++a)
      jhat[a] = ms.J[a] - 0.5 * dt * (ddx(f, ms.P[kPx[a]]) + ddy(f, ms.P[kPy[a]]));
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Matrix3d al =
          implicit_rotation(Eigen::Vector3d(f.B[0][k], f.B[1][k], f.B[2][k]), beta);
      chi_[std::size_t(k)] += tdt_ * beta * ms.rho[k] * al;
      const Eigen::Vector3d j = al * Eigen::Vector3d(jhat[0][k], jhat[1][k], jhat[2][k]);
      for (int a = 0; a < 3; ++a) src[a][k] += j[a];
    }
  }
  std::array<Field, 3> b;
  for (int a = 0; a < 3; ++a) b[a] = f.E[a] + tdt_ * (cb[a] - src[a]);
  rhs_ = pack_field(b);
}

Eigen::VectorXd FieldOperator::apply(const Eigen::VectorXd& e) const {
  const auto ef = unpack_field(e, nodes_);
  const auto cc = curl(*grid_, curl(*grid_, ef));
  const auto n = Eigen::Index(nodes_);
  Eigen::VectorXd out = e;
  for (int a = 0; a < 3; ++a) out.segment(a * n, n) += tdt_ * tdt_ * cc[a].matrix();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Vector3d ek(e[k], e[n + k], e[2 * n + k]);
    const Eigen::Vector3d r = chi_[std::size_t(k)] * ek;
    for (int a = 0; a < 3; ++a) out[a * n + k] += r[a];
  }
  return out;
}

FieldSolveStats field_solve(FieldGrid& f, const Moments& m, const std::vector<double>& qom,
                            double dt, double theta, const GmresOptions<double>& opt) {
  const FieldOperator op(f, m, qom, dt, theta);
  const Eigen::VectorXd e0 = pack_field(f.E);
  const auto res = gmres<double>([&](const Eigen::VectorXd& v) { return op.apply(v); },
                                 op.rhs(), e0, opt);
  auto eth = unpack_field(res.x, f.nodes());
  const auto ce = curl(f, eth);
  for (int a = 0; a < 3; ++a) {
    f.B[a] -= dt * ce[a];
    f.E[a] = (eth[a] - (1.0 - theta) * f.E[a]) / theta;
  }
  return {res.iterations, res.true_residual, res.breakdown, std::move(eth)};
}

}  // namespace examini::pic
