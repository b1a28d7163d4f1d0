#include "examini/pic/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Geometry>

namespace examini::pic {

CicWeights cic_weights(const FieldGrid& g, double x, double y) {
  const double xn = x / g.dx, yn = y / g.dy;
  const double fi = std::floor(xn), fj = std::floor(yn);
  const double fx = xn - fi, fy = yn - fj;
  const int i = int(fi), j = int(fj);
  return {{g.node(i, j), g.node(i + 1, j), g.node(i, j + 1), g.node(i + 1, j + 1)},
          {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy}};
}

std::array<int, 4> PicLayout::cells(const PicConfig& cfg, int rank) const {
  const int bx = cfg.nx / px, by = cfg.ny / py;
  const int cx = rank % px, cy = rank / px;
  return {cx * bx, (cx + 1) * bx, cy * by, (cy + 1) * by};
}

int PicLayout::owner(const PicConfig& cfg, double x, double y) const {
  const int ix = std::clamp(int(std::floor(x / cfg.dx())), 0, cfg.nx - 1);
  const int iy = std::clamp(int(std::floor(y / cfg.dy())), 0, cfg.ny - 1);
  return (iy / (cfg.ny / py)) * px + ix / (cfg.nx / px);
}

PicLayout pic_layout(const PicConfig& cfg, int ranks) {
  if (ranks < 1) throw InvalidArgument("rank count must be >= 1");
  PicLayout best{0, 0};
  for (int py = 1; py * py <= ranks; ++py) {
    if (ranks % py) continue;
    const int px = ranks / py;
    if (cfg.nx % px == 0 && cfg.ny % py == 0) best = {px, py};
  }
  if (best.px == 0)
    throw InvalidArgument("no " + std::to_string(ranks) + "-rank layout divides the " +
                          std::to_string(cfg.nx) + "x" + std::to_string(cfg.ny) + " grid");
  return best;
}

Species init_species(const PicConfig& cfg, int s, std::array<int, 4> cells) {
  const auto& sc = cfg.species.at(std::size_t(s));
  const int ppc = sc.ppc_x * sc.ppc_y;
  const double dx = cfg.dx(), dy = cfg.dy();
  const double q = (sc.qom < 0 ? -1.0 : 1.0) * sc.density * dx * dy / ppc;

  Species out;
  out.name = sc.name;
  out.qom = sc.qom;
  out.resize(std::size_t(cells[1] - cells[0]) * std::size_t(cells[3] - cells[2]) *
             std::size_t(ppc));
  std::size_t p = 0;
  for (int cy = cells[2]; cy < cells[3]; ++cy) {
    for (int cx = cells[0]; cx < cells[1]; ++cx) {
      const auto cell = std::uint64_t(cy) * std::uint64_t(cfg.nx) + std::uint64_t(cx);
      std::seed_seq seq{std::uint32_t(cfg.seed), std::uint32_t(cfg.seed >> 32),
                        std::uint32_t(s), std::uint32_t(cell), std::uint32_t(cell >> 32)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal(0.0, sc.vth);
      std::array<double, 3> v{};
      for (int k = 0; k < ppc; ++k, ++p) {
        const int kx = k % sc.ppc_x, ky = k / sc.ppc_x;
        out.x[Eigen::Index(p)] = (cx + (kx + 0.5) / sc.ppc_x) * dx;
        out.y[Eigen::Index(p)] = (cy + (ky + 0.5) / sc.ppc_y) * dy;
        if (cfg.quiet_start && k % 2 == 1) {
          for (auto& c : v) c = -c;
        } else {
          for (auto& c : v) c = normal(rng);
        }
        out.vx[Eigen::Index(p)] = sc.drift[0] + v[0];
        out.vy[Eigen::Index(p)] = sc.drift[1] + v[1];
        out.vz[Eigen::Index(p)] = sc.drift[2] + v[2];
        out.q[Eigen::Index(p)] = q;
        out.id[p] = cell * std::uint64_t(ppc) + std::uint64_t(k);
      }
    }
  }
  return out;
}

FieldGrid initial_fields(const PicConfig& cfg) {
  FieldGrid g(cfg.nx, cfg.ny, cfg.dx(), cfg.dy());
  for (int c = 0; c < 3; ++c) g.B[c].setConstant(cfg.b0[std::size_t(c)]);
  return g;
}

std::pair<ParticleSet, FieldGrid> init_maxwellian(const PicConfig& cfg) {
  ParticleSet p;
  for (int s = 0; s < int(cfg.species.size()); ++s)
    p.species.push_back(init_species(cfg, s, {0, cfg.nx, 0, cfg.ny}));
  return {std::move(p), initial_fields(cfg)};
}

Eigen::Vector3d midpoint_velocity(const Eigen::Vector3d& v, const Eigen::Vector3d& e,
                                  const Eigen::Vector3d& b, double beta) {
  const Eigen::Vector3d vt = v + beta * e;
  return (vt + beta * vt.cross(b) + beta * beta * vt.dot(b) * b) /
         (1.0 + beta * beta * b.squaredNorm());
}

namespace {

void gather_eb(const FieldGrid& f, double x, double y, Eigen::Vector3d& e, Eigen::Vector3d& b) {
  const auto w = cic_weights(f, x, y);
  e.setZero();
  b.setZero();
  for (int a = 0; a < 4; ++a) {
    const auto n = Eigen::Index(w.node[a]);
    for (int c = 0; c < 3; ++c) {
      e[c] += w.w[a] * f.E[c][n];
      b[c] += w.w[a] * f.B[c][n];
    }
  }
}

double wrap(double x, double l) {
  x -= l * std::floor(x / l);
  return x >= l ? 0.0 : x;
}

}  // namespace

void particle_mover(Species& s, const FieldGrid& f, double dt, int iterations) {
  const double beta = 0.5 * s.qom * dt;
  const double lx = f.lx(), ly = f.ly();
  iterations = std::max(iterations, 1);
  Eigen::Vector3d e, b, vbar;
  for (Eigen::Index p = 0; p < Eigen::Index(s.size()); ++p) {
    const Eigen::Vector3d v(s.vx[p], s.vy[p], s.vz[p]);
    const double x0 = s.x[p], y0 = s.y[p];
    double xb = x0, yb = y0;
    for (int it = 0; it < iterations; ++it) {
      gather_eb(f, xb, yb, e, b);
      vbar = midpoint_velocity(v, e, b, beta);
      xb = x0 + 0.5 * dt * vbar[0];
      yb = y0 + 0.5 * dt * vbar[1];
    }
    const Eigen::Vector3d vn = 2.0 * vbar - v;
    const double xn = x0 + dt * vbar[0], yn = y0 + dt * vbar[1];
    if (!vn.allFinite() || !std::isfinite(xn) || !std::isfinite(yn))
      throw NonFiniteParticle("species " + s.name + " particle " + std::to_string(p) +
                              " (id " + std::to_string(s.id[std::size_t(p)]) + ")");
    s.x[p] = wrap(xn, lx);
    s.y[p] = wrap(yn, ly);
    s.vx[p] = vn[0];
    s.vy[p] = vn[1];
    s.vz[p] = vn[2];
  }
}

void particle_mover(ParticleSet& ps, const FieldGrid& f, double dt, int iterations) {
  for (auto& s : ps.species) particle_mover(s, f, dt, iterations);
}

void deposit(const Species& s, const FieldGrid& g, SpeciesMoments& m) {
  const double inv_v = 1.0 / g.node_volume();
  for (Eigen::Index p = 0; p < Eigen::Index(s.size()); ++p) {
    const auto w = cic_weights(g, s.x[p], s.y[p]);
    const double v[3] = {s.vx[p], s.vy[p], s.vz[p]};
    const double pv[6] = {v[0] * v[0], v[0] * v[1], v[0] * v[2],
                          v[1] * v[1], v[1] * v[2], v[2] * v[2]};
    for (int a = 0; a < 4; ++a) {
      const auto n = Eigen::Index(w.node[a]);
      const double qw = s.q[p] * w.w[a] * inv_v;
      m.rho[n] += qw;
      for (int c = 0; c < 3; ++c) m.J[c][n] += qw * v[c];
      for (int c = 0; c < 6; ++c) m.P[c][n] += qw * pv[c];
    }
  }
}

Moments gather_moments(const ParticleSet& p, const FieldGrid& g) {
  Moments m(p.species.size(), g.nodes());
  for (std::size_t s = 0; s < p.species.size(); ++s) deposit(p.species[s], g, m.species[s]);
  return m;
}

double kinetic_energy(const Species& s) {
  return 0.5 * ((s.q / s.qom) * (s.vx.square() + s.vy.square() + s.vz.square())).sum();
}

}  // namespace examini::pic
