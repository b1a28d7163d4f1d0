#include "examini/mhd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "examini/core/exact_sum.hpp"
#include "examini/mhd/halo.hpp"
#include "examini/mhd/rk3.hpp"

namespace examini::mhd {

std::string to_string(RiemannSolver s) {
  return s == RiemannSolver::HLLD ? "HLLD" : "HLL";
}
std::string to_string(DivBMode m) { return m == DivBMode::CT ? "CT" : "GLM"; }

RiemannSolver riemann_from_string(const std::string& s) {
  if (s == "HLLD") return RiemannSolver::HLLD;
  if (s == "HLL") return RiemannSolver::HLL;
  throw InvalidArgument("unknown riemann solver '" + s + "'");
}

DivBMode divb_from_string(const std::string& s) {
  if (s == "CT") return DivBMode::CT;
  if (s == "GLM") return DivBMode::GLM;
  throw InvalidArgument("unknown divb mode '" + s + "'");
}

void MhdConfig::validate(int ranks) const {
  grid.validate(ranks);
  if (!(cfl > 0.0 && cfl < 1.0)) throw InvalidArgument("cfl must lie in (0, 1)");
  if (!(gamma > 1.0)) throw InvalidArgument("gamma must exceed 1");
  if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be >= 0");
  if (max_steps < 0) throw InvalidArgument("max_steps must be >= 0");
  if (!(glm_ch_ratio > 0.0)) throw InvalidArgument("glm_ch_ratio must be > 0");
  if (!(glm_damping > 0.0)) throw InvalidArgument("glm_damping must be > 0");
  if (problem != "orszag_tang" && problem != "cp_alfven")
    throw InvalidArgument("unknown problem '" + problem + "'");
}

MhdBlock::MhdBlock(const BlockGeometry& g) : geo(g), faces(g) {
  for (auto& f : u) f = BlockField::Zero(g.size());
}

ConsState MhdBlock::cell(std::ptrdiff_t c) const {
  ConsState v;
  for (int q = 0; q < NVAR; ++q) v[q] = u[q][c];
  return v;
}

void MhdBlock::set_cell(std::ptrdiff_t c, const ConsState& v) {
  for (int q = 0; q < NVAR; ++q) u[q][c] = v[q];
}

void cell_b_from_faces(MhdBlock& b) {
  const auto& geo = b.geo;
  for (int a = 0; a < 3; ++a) {
    const auto s = geo.stride(a);
    const auto& f = b.faces[a];
    auto& cb = b.u[BX + a];
    for (int k = 0; k < geo.n[2]; ++k)
      for (int j = 0; j < geo.n[1]; ++j)
        for (int i = 0; i < geo.n[0]; ++i) {
          const auto c = geo.index(i, j, k);
          cb[c] = 0.5 * (f[c] + f[c + s]);
        }
  }
}

namespace {

struct Range {
  int lo, hi;  // half-open
};

template <typename Fn>
void for_range(const std::array<Range, 3>& r, Fn&& fn) {
  for (int k = r[2].lo; k < r[2].hi; ++k)
    for (int j = r[1].lo; j < r[1].hi; ++j)
      for (int i = r[0].lo; i < r[0].hi; ++i) fn(i, j, k);
}

std::array<Range, 3> interior(const BlockGeometry& geo) {
  return {Range{0, geo.n[0]}, Range{0, geo.n[1]}, Range{0, geo.n[2]}};
}

}  // namespace

MhdSolver::MhdSolver(const MhdConfig& cfg, MhdBlock block, Communicator* comm)
    : cfg_(cfg), b_(std::move(block)), comm_(comm) {
  for (int a = 0; a < 3; ++a) dx_[a] = cfg_.grid.dx(a);
  const auto n = b_.geo.size();
  for (auto& f : w_) f = BlockField::Zero(n);
  for (auto& f : wl_) f = BlockField::Zero(n);
  for (auto& f : wr_) f = BlockField::Zero(n);
  for (auto& dir : flux_)
    for (auto& f : dir) f = BlockField::Zero(n);
  emf_ = EdgeEmf(b_.geo);
}

void MhdSolver::region(const char* name) {
  if (comm_) comm_->set_region(std::string(name));
}

void MhdSolver::boundary() {
  std::vector<BlockField*> fields;
  for (auto& f : b_.u) fields.push_back(&f);
  if (cfg_.divb == DivBMode::CT)
    for (int a = 0; a < 3; ++a) fields.push_back(&b_.faces[a]);
  halo_exchange(comm_, cfg_.grid, b_.geo, fields);
}

void MhdSolver::cons_to_prim_all() {
  const auto& geo = b_.geo;
  const int g = geo.g;
  const double gm1 = cfg_.gamma - 1.0;
  const auto& u = b_.u;
  for (int k = -g; k < geo.n[2] + g; ++k)
    for (int j = -g; j < geo.n[1] + g; ++j)
      for (int i = -g; i < geo.n[0] + g; ++i) {
        const auto c = geo.index(i, j, k);
        const double rho = u[RHO][c];
        if (!(rho > 0.0))
          throw NegativeDensity("density " + std::to_string(rho),
                                {geo.offset[0] + i, geo.offset[1] + j,
                                 geo.offset[2] + k});
        const double inv = 1.0 / rho;
        const double vx = u[MX][c] * inv, vy = u[MY][c] * inv, vz = u[MZ][c] * inv;
        const double bx = u[BX][c], by = u[BY][c], bz = u[BZ][c];
        double p = gm1 * (u[ENG][c] - 0.5 * rho * (vx * vx + vy * vy + vz * vz) -
                          0.5 * (bx * bx + by * by + bz * bz));
        if (!(p > cfg_.pressure_floor)) {
          if (cfg_.strict_pressure || !std::isfinite(p))
            throw NegativePressure("pressure " + std::to_string(p),
                                   {geo.offset[0] + i, geo.offset[1] + j,
                                    geo.offset[2] + k});
          p = cfg_.pressure_floor;
          const bool inside = i >= 0 && j >= 0 && k >= 0 && i < geo.n[0] &&
                              j < geo.n[1] && k < geo.n[2];
          if (inside) ++counters_.pressure_floors;
        }
        w_[RHO][c] = rho;
        w_[VX][c] = vx;
        w_[VY][c] = vy;
        w_[VZ][c] = vz;
        w_[PRS][c] = p;
        w_[BX][c] = bx;
        w_[BY][c] = by;
        w_[BZ][c] = bz;
        w_[PSI][c] = u[PSI][c];
      }
}

void MhdSolver::sweep(int d, double ch) {
  const auto& geo = b_.geo;
  const bool ct = cfg_.divb == DivBMode::CT;
  const auto sd = geo.stride(d);
  // Faces [0, n] along d; transverse [-1, n] when CT needs edge fluxes.
  std::array<Range, 3> faces;
  for (int a = 0; a < 3; ++a)
    faces[a] = a == d ? Range{0, geo.n[a] + 1}
                      : (ct ? Range{-1, geo.n[a] + 1} : Range{0, geo.n[a]});
  std::array<Range, 3> cells = faces;
  cells[d] = Range{-1, geo.n[d] + 1};

  region("Reconstruct");
  const WenoZParams prm{};
  const int nd = geo.n[d];
  for (int q = 0; q < NVAR; ++q) {
    const double* v = w_[q].data();
    double* wl = wl_[q].data();
    double* wr = wr_[q].data();
    for_range(cells, [&](int i, int j, int k) {
      const auto c = geo.index(i, j, k);
      const int id = d == 0 ? i : d == 1 ? j : k;
      const double s[5] = {v[c - 2 * sd], v[c - sd], v[c], v[c + sd], v[c + 2 * sd]};
      const auto [left, right] = wenoz_reconstruct(s, prm);
      if (id >= 0) wr[c] = left;
      if (id < nd) wl[c + sd] = right;
    });
  }
  // First-order fallback where the reconstruction loses positivity.
  for_range(faces, [&](int i, int j, int k) {
    const auto c = geo.index(i, j, k);
    if (wl_[RHO][c] > 0.0 && wl_[PRS][c] > 0.0 && wr_[RHO][c] > 0.0 &&
        wr_[PRS][c] > 0.0)
      return;
    for (int q = 0; q < NVAR; ++q) {
      wl_[q][c] = w_[q][c - sd];
      wr_[q][c] = w_[q][c];
    }
    const bool inside = i >= 0 && j >= 0 && k >= 0;
    if (inside) ++counters_.reconstruction_fallbacks;
  });

  region("Riemann");
  auto& flux = flux_[d];
  const auto& fb = b_.faces[d];
  for_range(faces, [&](int i, int j, int k) {
    const auto c = geo.index(i, j, k);
    PrimState l, r;
    for (int q = 0; q < NVAR; ++q) {
      l[q] = wl_[q][c];
      r[q] = wr_[q][c];
    }
    StateVec<double> f;
    if (ct) {
      l[BX + d] = r[BX + d] = fb[c];
      f = riemann_flux(l, r, d, cfg_.gamma, cfg_.riemann, &counters_.riemann);
      f[BX + d] = 0.0;
      f[PSI] = 0.0;
    } else {
      const auto [bn, psi] = glm_interface(l[BX + d], r[BX + d], l[PSI], r[PSI], ch);
      l[BX + d] = r[BX + d] = bn;
      f = riemann_flux(l, r, d, cfg_.gamma, cfg_.riemann, &counters_.riemann);
      f[BX + d] = psi;
      f[PSI] = ch * ch * bn;
    }
    for (int q = 0; q < NVAR; ++q) flux[q][c] = f[q];
  });
}

void MhdSolver::right_hand_side(int s, double dt) {
  region("RightHandSide");
  const auto& geo = b_.geo;
  const bool ct = cfg_.divb == DivBMode::CT;
  const double c_s = kRk3Weights[s];
  const std::array<std::ptrdiff_t, 3> st{geo.stride(0), geo.stride(1), geo.stride(2)};
  const std::array<double, 3> inv{1.0 / dx_[0], 1.0 / dx_[1], 1.0 / dx_[2]};
  for (int q = 0; q < NVAR; ++q) {
    if (ct && (q == BX || q == BY || q == BZ)) continue;
    auto& u = b_.u[q];
    const auto& u0 = u0_.u[q];
    const auto& fx = flux_[0][q];
    const auto& fy = flux_[1][q];
    const auto& fz = flux_[2][q];
    for_range(interior(geo), [&](int i, int j, int k) {
      const auto c = geo.index(i, j, k);
      const double l = -((fx[c + st[0]] - fx[c]) * inv[0] +
                         (fy[c + st[1]] - fy[c]) * inv[1] +
                         (fz[c + st[2]] - fz[c]) * inv[2]);
      u[c] = u0[c] + c_s * (u[c] + dt * l - u0[c]);
    });
  }
  if (ct) {
    const InductionFluxes induction{{{&flux_[0][BX], &flux_[0][BY], &flux_[0][BZ]},
                                     {&flux_[1][BX], &flux_[1][BY], &flux_[1][BZ]},
                                     {&flux_[2][BX], &flux_[2][BY], &flux_[2][BZ]}}};
    average_edge_emf(induction, emf_);
    const FaceB next = ct_update(b_.faces, emf_, dt, dx_);
    for (int a = 0; a < 3; ++a) {
      const auto& f0 = u0_.faces[a];
      b_.faces[a] = f0 + c_s * (next[a] - f0);
    }
    cell_b_from_faces(b_);
  }
}

void MhdSolver::stage(int s, double dt, double ch) {
  region("Boundary");
  boundary();
  region("ConsToPrim");
  cons_to_prim_all();
  for (int d = 0; d < 3; ++d) sweep(d, ch);
  right_hand_side(s, dt);
}

double MhdSolver::max_signal_speed() {
  const auto& geo = b_.geo;
  double smax = 0.0;
  for_range(interior(geo), [&](int i, int j, int k) {
    const auto c = geo.index(i, j, k);
    PrimState w;
    ConsState u = b_.cell(c);
    const double p = recovered_pressure(u, cfg_.gamma);
    u[ENG] += (std::max(p, cfg_.pressure_floor) - p) / (cfg_.gamma - 1.0);
    w = cons_to_prim(u, cfg_.gamma,
                     {geo.offset[0] + i, geo.offset[1] + j, geo.offset[2] + k});
    for (int a = 0; a < 3; ++a) {
      const double lam =
          std::abs(w[VX + a]) + fast_speed_x(rotate_to_x(w, a), cfg_.gamma);
      smax = std::max(smax, lam);
    }
  });
  return comm_ ? comm_->allreduce_max(smax) : smax;
}

double MhdSolver::compute_dt() {
  const auto& geo = b_.geo;
  double dt;
  if (cfg_.divb == DivBMode::GLM) {
    ch_ = cfg_.glm_ch_ratio * max_signal_speed();
    dt = cfg_.cfl * cfg_.grid.min_dx() / ch_;
  } else {
    double rate = 0.0;
    for_range(interior(geo), [&](int i, int j, int k) {
      const auto c = geo.index(i, j, k);
      ConsState u = b_.cell(c);
      const double p = recovered_pressure(u, cfg_.gamma);
      u[ENG] += (std::max(p, cfg_.pressure_floor) - p) / (cfg_.gamma - 1.0);
      const PrimState w = cons_to_prim(
          u, cfg_.gamma, {geo.offset[0] + i, geo.offset[1] + j, geo.offset[2] + k});
      for (int a = 0; a < 3; ++a) {
        const double lam =
            std::abs(w[VX + a]) + fast_speed_x(rotate_to_x(w, a), cfg_.gamma);
        rate = std::max(rate, lam / dx_[a]);
      }
    });
    if (comm_) rate = comm_->allreduce_max(rate);
    dt = cfg_.cfl / rate;
  }
  const double left = cfg_.t_end - b_.time;
  if (left > 0.0 && dt > left) dt = left;
  return dt;
}

void MhdSolver::rk3_step(double dt) {
  if (cfg_.divb == DivBMode::GLM && ch_ <= 0.0)
    ch_ = cfg_.glm_ch_ratio * max_signal_speed();
  u0_ = b_;
  for (int s = 0; s < 3; ++s) {
    try {
      stage(s, dt, ch_);
    } catch (const NegativePressure& e) {
      throw NegativePressure(e, "RK3 stage " + std::to_string(s));
    } catch (const NegativeDensity& e) {
      throw NegativeDensity(e, "RK3 stage " + std::to_string(s));
    }
  }
  b_.time += dt;
  if (cfg_.divb == DivBMode::GLM) glm_damp(dt, ch_);
}

void MhdSolver::glm_damp(double dt, double ch) {
  const double factor =
      std::exp(-dt * ch / (cfg_.glm_damping * cfg_.grid.min_dx()));
  const auto& geo = b_.geo;
  auto& psi = b_.u[PSI];
  for_range(interior(geo), [&](int i, int j, int k) {
    psi[geo.index(i, j, k)] *= factor;
  });
}

void MhdSolver::glm_step(double dt, double ch) {
  if (cfg_.divb != DivBMode::GLM)
    throw InvalidArgument("glm_step requires divb mode GLM");
  ch_ = ch;
  rk3_step(dt);
}

BlockField MhdSolver::cell_divergence() const {
  const auto& geo = b_.geo;
  BlockField div = BlockField::Zero(geo.size());
  const std::array<std::ptrdiff_t, 3> st{geo.stride(0), geo.stride(1), geo.stride(2)};
  for_range(interior(geo), [&](int i, int j, int k) {
    const auto c = geo.index(i, j, k);
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
      s += (b_.u[BX + a][c + st[a]] - b_.u[BX + a][c - st[a]]) / (2.0 * dx_[a]);
    div[c] = s;
  });
  return div;
}

MhdDiagnostics MhdSolver::diagnostics() {
  const auto& geo = b_.geo;
  BlockField div;
  if (cfg_.divb == DivBMode::CT) {
    div = face_divergence(b_.faces, dx_);
  } else {
    boundary();
    div = cell_divergence();
  }
  // Exact accumulation keeps the totals independent of the decomposition.
  std::array<ExactSum, 6> acc;  // mass, m[3], E, sum div^2
  double div_max = 0.0, b_max = 0.0;
  for_range(interior(geo), [&](int i, int j, int k) {
    const auto c = geo.index(i, j, k);
    acc[0].add(b_.u[RHO][c]);
    acc[1].add(b_.u[MX][c]);
    acc[2].add(b_.u[MY][c]);
    acc[3].add(b_.u[MZ][c]);
    acc[4].add(b_.u[ENG][c]);
    acc[5].add(div[c] * div[c]);
    div_max = std::max(div_max, std::abs(div[c]));
    const double b2 = b_.u[BX][c] * b_.u[BX][c] + b_.u[BY][c] * b_.u[BY][c] +
                      b_.u[BZ][c] * b_.u[BZ][c];
    b_max = std::max(b_max, std::sqrt(b2));
  });
  constexpr std::size_t L = ExactSum::kLimbs + 1;
  std::vector<double> packed(acc.size() * L);
  for (std::size_t a = 0; a < acc.size(); ++a) {
    const auto p = acc[a].pack();
    std::copy(p.begin(), p.end(), packed.begin() + std::ptrdiff_t(a * L));
  }
  if (comm_) {
    packed = comm_->allreduce_sum(std::span<const double>(packed));
    div_max = comm_->allreduce_max(div_max);
    b_max = comm_->allreduce_max(b_max);
  }
  std::array<double, 6> total{};
  for (std::size_t a = 0; a < acc.size(); ++a)
    total[a] = ExactSum::unpack(std::span<const double>(packed).subspan(a * L, L)).value();
  const double cells = double(cfg_.grid.global_cells[0]) * cfg_.grid.global_cells[1] *
                       cfg_.grid.global_cells[2];
  const double vol = dx_[0] * dx_[1] * dx_[2];
  MhdDiagnostics d;
  d.time = b_.time;
  d.mass = total[0] * vol;
  d.momentum = {total[1] * vol, total[2] * vol, total[3] * vol};
  d.energy = total[4] * vol;
  d.divb_l2 = std::sqrt(total[5] / cells);
  d.divb_max = div_max * cfg_.grid.min_dx() / (b_max > 0.0 ? b_max : 1.0);
  return d;
}

}  // namespace examini::mhd
