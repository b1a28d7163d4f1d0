#include "examini/pic/types.hpp"

#include <cmath>

#include "examini/pic/kernels.hpp"

namespace examini::pic {

void Species::resize(std::size_t n) {
  for (auto* a : {&x, &y, &vx, &vy, &vz, &q}) a->conservativeResize(Eigen::Index(n));
  id.resize(n);
}

void Species::append(const Species& o) {
  const auto n0 = size();
  resize(n0 + o.size());
  const auto m = Eigen::Index(o.size());
  x.segment(Eigen::Index(n0), m) = o.x;
  y.segment(Eigen::Index(n0), m) = o.y;
  vx.segment(Eigen::Index(n0), m) = o.vx;
  vy.segment(Eigen::Index(n0), m) = o.vy;
  vz.segment(Eigen::Index(n0), m) = o.vz;
  q.segment(Eigen::Index(n0), m) = o.q;
  std::copy(o.id.begin(), o.id.end(), id.begin() + std::ptrdiff_t(n0));
}

std::size_t ParticleSet::total() const {
  std::size_t n = 0;
  for (const auto& s : species) n += s.size();
  return n;
}

FieldGrid::FieldGrid(int nx_, int ny_, double dx_, double dy_)
    : nx(nx_), ny(ny_), dx(dx_), dy(dy_) {
  for (auto& f : E) f = Field::Zero(Eigen::Index(nodes()));
  for (auto& f : B) f = Field::Zero(Eigen::Index(nodes()));
}

double FieldGrid::energy() const {
  double e = 0.0;
  for (int c = 0; c < 3; ++c) e += E[c].square().sum() + B[c].square().sum();
  return 0.5 * e * node_volume();
}

Moments::Moments(std::size_t nspecies, std::size_t nodes) : species(nspecies) {
  const auto n = Eigen::Index(nodes);
  for (auto& s : species) {
    s.rho = Field::Zero(n);
    for (auto& f : s.J) f = Field::Zero(n);
    for (auto& f : s.P) f = Field::Zero(n);
  }
}

std::vector<double> Moments::flatten() const {
  std::vector<double> out;
  for (const auto& s : species) {
    auto put = [&](const Field& f) { out.insert(out.end(), f.data(), f.data() + f.size()); };
    put(s.rho);
    for (const auto& f : s.J) put(f);
    for (const auto& f : s.P) put(f);
  }
  return out;
}

void Moments::assign(const std::vector<double>& flat) {
  std::size_t p = 0;
  for (auto& s : species) {
    auto take = [&](Field& f) {
      if (p + std::size_t(f.size()) > flat.size())
        throw InvalidArgument("moment buffer too short");
      std::copy(flat.begin() + std::ptrdiff_t(p),
                flat.begin() + std::ptrdiff_t(p + std::size_t(f.size())), f.data());
      p += std::size_t(f.size());
    };
    take(s.rho);
    for (auto& f : s.J) take(f);
    for (auto& f : s.P) take(f);
  }
}

double PicConfig::explicit_cfl_dt() const {
  return 1.0 / std::sqrt(1.0 / (dx() * dx()) + 1.0 / (dy() * dy()));
}

void PicConfig::validate(int ranks) const {
  if (nx <= 0 || ny <= 0) throw InvalidArgument("grid resolution must be positive");
  if (!(lx > 0.0 && ly > 0.0)) throw InvalidArgument("domain size must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(theta >= 0.5 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0.5, 1]");
  if (mover_iterations < 1) throw InvalidArgument("mover_iterations must be >= 1");
  if (!(gmres.tolerance > 0.0) || gmres.restart < 1 || gmres.max_iters < 1)
    throw InvalidArgument("invalid gmres settings");
  if (species.empty()) throw InvalidArgument("at least one species is required");
  for (const auto& s : species) {
    if (s.qom == 0.0) throw InvalidArgument("species " + s.name + ": qom must be nonzero");
    if (s.ppc_x < 1 || s.ppc_y < 1)
      throw InvalidArgument("species " + s.name + ": particles per cell must be >= 1");
    if (quiet_start && (s.ppc_x * s.ppc_y) % 2 != 0)
      throw InvalidArgument("species " + s.name + ": quiet start needs an even ppc");
    if (!(s.vth >= 0.0)) throw InvalidArgument("species " + s.name + ": vth must be >= 0");
  }
  if (cycles < 0) throw InvalidArgument("cycles must be >= 0");
  pic_layout(*this, ranks);
}

}  // namespace examini::pic
