#include "examini/config/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

namespace examini::config {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& e : v) s += (s.empty() ? "" : "; ") + e;
  return s;
}

void throw_if(const std::vector<std::string>& errors) {
  if (!errors.empty()) throw ValidationError(errors);
}

/// Runs a domain-level validate() once the field checks pass, so cross-field
/// rules (divisibility, layouts) are reported too.
template <typename F>
void cross_check(std::vector<std::string>& errors, F&& f) {
  if (!errors.empty()) return;
  try {
    f();
  } catch (const InvalidArgument& e) {
    const std::string w = e.what();
    errors.push_back("(config): " + w.substr(e.kind().size() + 2));
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error("ValidationError", join(violations)), violations_(std::move(violations)) {}

ObjectReader::ObjectReader(const json& j, std::string path, std::vector<std::string>& errors)
    : j_(&j), path_(std::move(path)), errors_(&errors) {
  if (!j.is_object()) {
    errors.push_back((path_.empty() ? std::string("(root)") : path_) + ": must be an object");
    valid_ = false;
  }
}

std::string ObjectReader::path_of(std::string_view key) const {
  return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

bool ObjectReader::has(std::string_view key) const {
  return j_->is_object() && j_->contains(key);
}

const json* ObjectReader::get(std::string_view key) {
  seen_.emplace_back(key);
  if (!has(key)) return nullptr;
  return &(*j_)[std::string(key)];
}

void ObjectReader::check(bool ok, std::string_view key, const std::string& message) {
  if (ok) return;
  errors_->push_back(path_of(key) + ": " + message);
  valid_ = false;
}

void ObjectReader::finish() {
  if (!j_->is_object()) return;
  for (const auto& [k, v] : j_->items())
    if (std::find(seen_.begin(), seen_.end(), k) == seen_.end())
      check(false, k, "unknown field");
}

bool convert(const json& j, int& out) {
  if (!j.is_number_integer()) return false;
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) return false;
  out = int(v);
  return true;
}

bool convert(const json& j, std::int64_t& out) {
  if (!j.is_number_integer()) return false;
  if (j.is_number_unsigned() &&
      j.get<std::uint64_t>() > std::uint64_t(std::numeric_limits<std::int64_t>::max()))
    return false;
  out = j.get<std::int64_t>();
  return true;
}

bool convert(const json& j, std::uint64_t& out) {
  if (j.is_number_unsigned()) {
    out = j.get<std::uint64_t>();
    return true;
  }
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    out = std::uint64_t(j.get<std::int64_t>());
    return true;
  }
  return false;
}

bool convert(const json& j, double& out) {
  if (!j.is_number()) return false;
  out = j.get<double>();
  return true;
}

bool convert(const json& j, bool& out) {
  if (!j.is_boolean()) return false;
  out = j.get<bool>();
  return true;
}

bool convert(const json& j, std::string& out) {
  if (!j.is_string()) return false;
  out = j.get<std::string>();
  return true;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot read " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ValidationError({path.string() + ": not valid JSON (" + e.what() + ")"});
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot write " + path.string());
  os << j.dump(2) << "\n";
  if (!os) throw IoFailure("write failed for " + path.string());
}

int ranks_from_json(const json& j) {
  int ranks = 1;
  if (j.is_object() && j.contains("ranks")) {
    if (!convert(j["ranks"], ranks) || ranks < 1)
      throw ValidationError({"ranks: must be a positive integer"});
  }
  return ranks;
}

// ---------------------------------------------------------------- MHD

mhd::MhdConfig mhd_from_json(const json& j, int ranks) {
  mhd::MhdConfig c;
  std::vector<std::string> err;
  ObjectReader r(j, "", err);
  int unused_ranks = 1;
  r.read("ranks", unused_ranks);

  if (r.read("problem", c.problem))
    r.check(c.problem == "orszag_tang" || c.problem == "cp_alfven", "problem",
            "must be one of orszag_tang, cp_alfven");
  if (r.read("cells", c.grid.global_cells))
    for (int a = 0; a < 3; ++a)
      r.check(c.grid.global_cells[a] > 0, "cells[" + std::to_string(a) + "]",
              "must be positive");
  if (r.read("extent", c.grid.extent))
    for (int a = 0; a < 3; ++a)
      r.check(c.grid.extent[a][1] > c.grid.extent[a][0], "extent[" + std::to_string(a) + "]",
              "must satisfy lo < hi");
  if (r.read("ghost_width", c.grid.ghost_width))
    r.check(c.grid.ghost_width >= 3, "ghost_width", "must be >= 3");
  if (r.read("gamma", c.gamma)) r.check(c.gamma > 1.0, "gamma", "must exceed 1");
  if (r.read("cfl", c.cfl)) r.check(c.cfl > 0.0 && c.cfl < 1.0, "cfl", "must lie in (0, 1)");
  if (r.read("t_end", c.t_end)) r.check(c.t_end >= 0.0, "t_end", "must be >= 0");
  if (r.read("max_steps", c.max_steps)) r.check(c.max_steps >= 0, "max_steps", "must be >= 0");
  std::string s;
  if (r.read("riemann", s)) {
    r.check(s == "HLLD" || s == "HLL", "riemann", "must be HLLD or HLL");
    if (s == "HLLD" || s == "HLL") c.riemann = mhd::riemann_from_string(s);
  }
  if (r.read("divb", s)) {
    r.check(s == "CT" || s == "GLM", "divb", "must be CT or GLM");
    if (s == "CT" || s == "GLM") c.divb = mhd::divb_from_string(s);
  }
  if (r.read("glm_ch_ratio", c.glm_ch_ratio))
    r.check(c.glm_ch_ratio > 0.0, "glm_ch_ratio", "must be > 0");
  if (r.read("glm_damping", c.glm_damping))
    r.check(c.glm_damping > 0.0, "glm_damping", "must be > 0");
  r.read("amplitude", c.amplitude);
  r.read("wave_cycles", c.wave_cycles);
  if (r.read("pressure_floor", c.pressure_floor))
    r.check(c.pressure_floor > 0.0, "pressure_floor", "must be > 0");
  r.read("strict_pressure", c.strict_pressure);
  if (r.read("output_every", c.output_every))
    r.check(c.output_every >= 0, "output_every", "must be >= 0");
  r.read("seed", c.seed);
  r.finish();

  c.grid.rank_layout = factor_ranks(ranks);
  cross_check(err, [&] { c.validate(ranks); });
  throw_if(err);
  return c;
}

json to_json(const mhd::MhdConfig& c) {
  const auto& g = c.grid;
  return {{"problem", c.problem},
          {"cells", g.global_cells},
          {"extent", g.extent},
          {"ghost_width", g.ghost_width},
          {"gamma", c.gamma},
          {"cfl", c.cfl},
          {"t_end", c.t_end},
          {"max_steps", c.max_steps},
          {"riemann", mhd::to_string(c.riemann)},
          {"divb", mhd::to_string(c.divb)},
          {"glm_ch_ratio", c.glm_ch_ratio},
          {"glm_damping", c.glm_damping},
          {"amplitude", c.amplitude},
          {"wave_cycles", c.wave_cycles},
          {"pressure_floor", c.pressure_floor},
          {"strict_pressure", c.strict_pressure},
          {"output_every", c.output_every},
          {"seed", c.seed}};
}

// ---------------------------------------------------------------- PIC

pic::PicConfig pic_from_json(const json& j, int ranks) {
  pic::PicConfig c;
  std::vector<std::string> err;
  ObjectReader r(j, "", err);
  int unused_ranks = 1;
  r.read("ranks", unused_ranks);

  if (r.read("nx", c.nx)) r.check(c.nx > 0, "nx", "must be positive");
  if (r.read("ny", c.ny)) r.check(c.ny > 0, "ny", "must be positive");
  if (r.read("lx", c.lx)) r.check(c.lx > 0.0, "lx", "must be positive");
  if (r.read("ly", c.ly)) r.check(c.ly > 0.0, "ly", "must be positive");
  if (r.read("dt", c.dt)) r.check(c.dt > 0.0, "dt", "must be positive");
  if (r.read("theta", c.theta))
    r.check(c.theta >= 0.5 && c.theta <= 1.0, "theta", "must lie in [0.5, 1]");
  if (r.read("mover_iterations", c.mover_iterations))
    r.check(c.mover_iterations >= 1, "mover_iterations", "must be >= 1");
  if (const json* g = r.get("gmres")) {
    ObjectReader gr(*g, "gmres", err);
    if (gr.read("tolerance", c.gmres.tolerance))
      gr.check(c.gmres.tolerance > 0.0, "tolerance", "must be > 0");
    if (gr.read("restart", c.gmres.restart)) gr.check(c.gmres.restart >= 1, "restart", "must be >= 1");
    if (gr.read("max_iters", c.gmres.max_iters))
      gr.check(c.gmres.max_iters >= 1, "max_iters", "must be >= 1");
    gr.finish();
  }
  if (const json* sp = r.get("species")) {
    if (!sp->is_array() || sp->empty()) {
      r.check(false, "species", "must be a non-empty array");
    } else {
      c.species.assign(sp->size(), pic::SpeciesConfig{});
      for (std::size_t i = 0; i < sp->size(); ++i) {
        auto& s = c.species[i];
        ObjectReader sr((*sp)[i], "species[" + std::to_string(i) + "]", err);
        sr.read("name", s.name);
        if (sr.read("qom", s.qom)) sr.check(s.qom != 0.0, "qom", "must be nonzero");
        if (sr.read("density", s.density)) sr.check(s.density > 0.0, "density", "must be > 0");
        if (sr.read("vth", s.vth)) sr.check(s.vth >= 0.0, "vth", "must be >= 0");
        sr.read("drift", s.drift);
        if (sr.read("ppc_x", s.ppc_x)) sr.check(s.ppc_x >= 1, "ppc_x", "must be >= 1");
        if (sr.read("ppc_y", s.ppc_y)) sr.check(s.ppc_y >= 1, "ppc_y", "must be >= 1");
        sr.finish();
      }
    }
  }
  r.read("b0", c.b0);
  r.read("quiet_start", c.quiet_start);
  r.read("seed", c.seed);
  if (r.read("cycles", c.cycles)) r.check(c.cycles >= 0, "cycles", "must be >= 0");
  r.finish();

  cross_check(err, [&] { c.validate(ranks); });
  throw_if(err);
  return c;
}

json to_json(const pic::PicConfig& c) {
  json species = json::array();
  for (const auto& s : c.species)
    species.push_back({{"name", s.name},
                       {"qom", s.qom},
                       {"density", s.density},
                       {"vth", s.vth},
                       {"drift", s.drift},
                       {"ppc_x", s.ppc_x},
                       {"ppc_y", s.ppc_y}});
  return {{"nx", c.nx},
          {"ny", c.ny},
          {"lx", c.lx},
          {"ly", c.ly},
          {"dt", c.dt},
          {"theta", c.theta},
          {"mover_iterations", c.mover_iterations},
          {"gmres",
           {{"tolerance", c.gmres.tolerance},
            {"restart", c.gmres.restart},
            {"max_iters", c.gmres.max_iters}}},
          {"species", species},
          {"b0", c.b0},
          {"quiet_start", c.quiet_start},
          {"seed", c.seed},
          {"cycles", c.cycles}};
}

// ---------------------------------------------------------------- gravity

gravity::GravityConfig gravity_from_json(const json& j, int ranks) {
  gravity::GravityConfig c;
  std::vector<std::string> err;
  ObjectReader r(j, "", err);
  int unused_ranks = 1;
  r.read("ranks", unused_ranks);

  std::uint64_t n = c.bodies;
  if (r.read("bodies", n)) {
    r.check(n >= 2, "bodies", "must be >= 2");
    c.bodies = std::size_t(n);
  }
  if (r.read("distribution", c.distribution))
    r.check(c.distribution == "plummer" || c.distribution == "uniform", "distribution",
            "must be plummer or uniform");
  r.read("seed", c.seed);
  if (r.read("active_fraction", c.active_fraction))
    r.check(c.active_fraction > 0.0 && c.active_fraction <= 1.0, "active_fraction",
            "must lie in (0, 1]");
  if (r.read("leaf_capacity", c.leaf_capacity))
    r.check(c.leaf_capacity >= 1, "leaf_capacity", "must be >= 1");
  std::string w;
  if (r.read("walk", w)) {
    r.check(w == "classic" || w == "grouped", "walk", "must be classic or grouped");
    if (w == "classic" || w == "grouped") c.walk = gravity::walk_from_string(w);
  }
  if (r.read("theta", c.params.theta)) r.check(c.params.theta >= 0.0, "theta", "must be >= 0");
  if (r.read("softening", c.params.softening))
    r.check(c.params.softening > 0.0, "softening", "must be > 0");
  if (r.read("group_size", c.params.group_size))
    r.check(c.params.group_size >= 1, "group_size", "must be >= 1");
  if (r.read("direct_radius", c.params.direct_radius))
    r.check(c.params.direct_radius >= 0.0, "direct_radius", "must be >= 0");
  r.read("sph", c.sph);
  if (const json* s = r.get("sph_params")) {
    ObjectReader sr(*s, "sph_params", err);
    if (sr.read("n_ngb", c.sph_params.n_ngb)) sr.check(c.sph_params.n_ngb >= 8, "n_ngb", "must be >= 8");
    if (sr.read("tolerance", c.sph_params.tolerance))
      sr.check(c.sph_params.tolerance > 0.0, "tolerance", "must be > 0");
    if (sr.read("max_bisections", c.sph_params.max_bisections))
      sr.check(c.sph_params.max_bisections >= 1, "max_bisections", "must be >= 1");
    sr.finish();
  }
  if (r.read("steps", c.steps)) r.check(c.steps >= 1, "steps", "must be >= 1");
  r.read("check_direct", c.check_direct);
  r.finish();

  cross_check(err, [&] { c.validate(ranks); });
  throw_if(err);
  return c;
}

json to_json(const gravity::GravityConfig& c) {
  return {{"bodies", std::uint64_t(c.bodies)},
          {"distribution", c.distribution},
          {"seed", c.seed},
          {"active_fraction", c.active_fraction},
          {"leaf_capacity", c.leaf_capacity},
          {"walk", gravity::to_string(c.walk)},
          {"theta", c.params.theta},
          {"softening", c.params.softening},
          {"group_size", c.params.group_size},
          {"direct_radius", c.params.direct_radius},
          {"sph", c.sph},
          {"sph_params",
           {{"n_ngb", c.sph_params.n_ngb},
            {"tolerance", c.sph_params.tolerance},
            {"max_bisections", c.sph_params.max_bisections}}},
          {"steps", c.steps},
          {"check_direct", c.check_direct}};
}

}  // namespace examini::config
