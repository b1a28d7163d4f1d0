#include "examini/gravity/driver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <random>

#include <json.hpp>

#include "examini/core/comm.hpp"

namespace examini::gravity {

namespace {

constexpr int kGatherTag = 9000;

}  // namespace

std::string to_string(Walk w) { return w == Walk::Classic ? "classic" : "grouped"; }

Walk walk_from_string(const std::string& s) {
  if (s == "classic") return Walk::Classic;
  if (s == "grouped") return Walk::Grouped;
  throw InvalidArgument("unknown walk '" + s + "' (expected classic or grouped)");
}

void GravityConfig::validate(int ranks) const {
  if (bodies < 2) throw InvalidArgument("at least 2 bodies are required");
  if (distribution != "plummer" && distribution != "uniform")
    throw InvalidArgument("unknown distribution '" + distribution + "'");
  if (!(active_fraction > 0.0 && active_fraction <= 1.0))
    throw InvalidArgument("active_fraction must lie in (0, 1]");
  if (leaf_capacity < 1) throw InvalidArgument("leaf_capacity must be >= 1");
  if (steps < 1) throw InvalidArgument("steps must be >= 1");
  if (ranks < 1 || std::size_t(ranks) > bodies)
    throw InvalidArgument("rank count must lie in [1, bodies]");
  params.validate();
  if (sph) {
    sph_params.validate();
    if (bodies <= std::size_t(sph_params.n_ngb))
      throw InvalidArgument("sph needs more bodies than n_ngb");
  }
}

std::vector<Body> make_bodies(const GravityConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Body> out(cfg.bodies);
  const double m = 1.0 / double(cfg.bodies);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Body& b = out[i];
    b.id = i;
    b.mass = m;
    if (cfg.distribution == "uniform") {
      b.pos = {u(rng), u(rng), u(rng)};
    } else {
      double r = 0.0;
      do {
        const double x = std::max(u(rng), 1e-12);
        r = 1.0 / std::sqrt(std::pow(x, -2.0 / 3.0) - 1.0);
      } while (!(r <= 10.0));
      const double z = 2.0 * u(rng) - 1.0, phi = 2.0 * std::numbers::pi * u(rng);
      const double s = std::sqrt(1.0 - z * z);
      b.pos = r * Eigen::Vector3d(s * std::cos(phi), s * std::sin(phi), z);
    }
    b.active = u(rng) < cfg.active_fraction;
  }
  return out;
}

GravityResult run_gravity(const GravityConfig& cfg, int ranks, int workers, bool record_traces) {
  cfg.validate(ranks);
  const std::vector<Body> initial = make_bodies(cfg);
  World world({.ranks = ranks, .workers = workers, .record_traces = record_traces});
  GravityResult result;
  std::vector<double> cpu(std::size_t(ranks), 0.0);
  std::mutex mu;

  const auto t0 = wall_now_ns();
  world.run([&](Communicator& comm) {
    const auto c0 = thread_cpu_ns();
    const std::size_t n = initial.size();
    const std::size_t first = n * std::size_t(comm.rank()) / std::size_t(ranks);
    const std::size_t last = n * std::size_t(comm.rank() + 1) / std::size_t(ranks);
    std::vector<Body> bodies;
    OctTree tree;
    Accels acc;
    std::vector<double> h, rho;
    std::uint64_t interactions = 0;

    for (int step = 0; step < cfg.steps; ++step) {
      comm.set_region(std::string("TreeBuild"));
      bodies = initial;
      tree = build_tree(bodies, bounding_cube(bodies), cfg.leaf_capacity);

      comm.set_region(std::string("ForceWalk"));
      // Bodies outside this rank's range stay sources but receive nothing.
      std::vector<Body> mine = bodies;
      for (std::size_t i = 0; i < n; ++i)
        if (i < first || i >= last) mine[i].active = false;
      interactions = 0;
      if (cfg.walk == Walk::Classic) {
        WalkStats st;
        acc = bh_force(tree, mine, cfg.params, &st);
        interactions = st.interactions;
      } else {
        GroupedWalkStats st;
        acc = grouped_walk_force(tree, mine, cfg.params, &st);
        interactions = st.interactions;
      }

      if (cfg.sph) {
        comm.set_region(std::string("Density"));
        h = find_hsml(tree, bodies, cfg.sph_params, first, last - first);
        rho = sph_density(tree, bodies, h, first);
      }
    }

    comm.set_region(std::string("Gather"));
    std::vector<double> buf;
    buf.reserve((last - first) * 5);
    for (std::size_t i = first; i < last; ++i) buf.insert(buf.end(), acc[i].data(), acc[i].data() + 3);
    if (cfg.sph) {
      buf.insert(buf.end(), h.begin(), h.end());
      buf.insert(buf.end(), rho.begin(), rho.end());
    }
    const double total_inter = comm.size() > 1 ? comm.allreduce_sum(double(interactions))
                                               : double(interactions);
    if (comm.rank() != 0) {
      comm.send_values<double>(0, kGatherTag, buf);
    } else {
      Accels all(n, Eigen::Vector3d::Zero());
      std::vector<double> hh(cfg.sph ? n : 0), rr(cfg.sph ? n : 0);
      for (int r = 0; r < comm.size(); ++r) {
        const std::vector<double> b = r == 0 ? buf : comm.recv_values<double>(r, kGatherTag);
        const std::size_t f = n * std::size_t(r) / std::size_t(ranks);
        const std::size_t l = n * std::size_t(r + 1) / std::size_t(ranks);
        for (std::size_t i = f; i < l; ++i)
          all[i] = Eigen::Vector3d(b[3 * (i - f)], b[3 * (i - f) + 1], b[3 * (i - f) + 2]);
        if (cfg.sph)
          for (std::size_t i = f; i < l; ++i) {
            hh[i] = b[3 * (l - f) + (i - f)];
            rr[i] = b[4 * (l - f) + (i - f)];
          }
      }
      GravityResult& res = result;
      res.accel = std::move(all);
      res.hsml = std::move(hh);
      res.density = std::move(rr);
      if (cfg.check_direct) {
        comm.set_region(std::string("Verify"));
        res.direct = direct_sum(bodies, cfg.params.softening);
        for (std::size_t i = 0; i < n; ++i)
          if (!bodies[i].active) res.direct[i].setZero();
        res.rel_error = relative_errors(res.accel, res.direct);
      }
      res.bodies = bodies;
      res.interactions = std::uint64_t(total_inter);
    }
    comm.set_region(std::nullopt);
    comm.mark();
    const auto c1 = thread_cpu_ns();
    std::lock_guard lock(mu);
    cpu[std::size_t(comm.rank())] = 1e-9 * double(c1 - c0);
  });
  result.timing.wall_seconds = 1e-9 * double(wall_now_ns() - t0);
  result.timing.rank_cpu_seconds = *std::max_element(cpu.begin(), cpu.end());
  result.timeline = world.timeline();
  for (std::size_t s = 0; s < result.timeline.stream_count(); ++s)
    for (const auto& e : result.timeline.stream(s))
      if (e.region) result.timing.region_seconds[*e.region] += 1e-9 * double(e.duration());
  return result;
}

void write_snapshot(std::span<const Body> bodies, const std::filesystem::path& stem) {
  auto bin = stem;
  bin += ".bin";
  std::ofstream os(bin, std::ios::binary);
  if (!os) throw IoFailure("cannot write " + bin.string());
  for (const auto& b : bodies) {
    const double rec[9] = {double(b.id), b.pos[0], b.pos[1], b.pos[2], b.vel[0],
                           b.vel[1],     b.vel[2], b.mass,   b.active ? 1.0 : 0.0};
    os.write(reinterpret_cast<const char*>(rec), sizeof rec);
  }
  if (!os) throw IoFailure("short write to " + bin.string());
  nlohmann::json header{{"count", bodies.size()},
                        {"dtype", "float64"},
                        {"fields", {"id", "x", "y", "z", "vx", "vy", "vz", "mass", "active"}},
                        {"data", bin.filename().string()}};
  auto js = stem;
  js += ".json";
  std::ofstream hs(js);
  if (!hs) throw IoFailure("cannot write " + js.string());
  hs << header.dump(2) << "\n";
}

std::vector<Body> read_snapshot(const std::filesystem::path& stem) {
  auto js = stem;
  js += ".json";
  std::ifstream hs(js);
  if (!hs) throw IoFailure("cannot read " + js.string());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw IoFailure(js.string() + ": " + e.what());
  }
  const auto count = header.at("count").get<std::size_t>();
  const auto bin = js.parent_path() / header.at("data").get<std::string>();
  std::ifstream is(bin, std::ios::binary);
  if (!is) throw IoFailure("cannot read " + bin.string());
  std::vector<Body> out(count);
  for (auto& b : out) {
    double rec[9];
    if (!is.read(reinterpret_cast<char*>(rec), sizeof rec))
      throw IoFailure(bin.string() + " is shorter than its header says");
    b.id = std::uint64_t(rec[0]);
    b.pos = {rec[1], rec[2], rec[3]};
    b.vel = {rec[4], rec[5], rec[6]};
    b.mass = rec[7];
    b.active = rec[8] != 0.0;
  }
  return out;
}

void write_force_csv(std::span<const Body> bodies, const Accels& tree, const Accels& direct,
                     const std::filesystem::path& path) {
  if (tree.size() != bodies.size() || direct.size() != bodies.size())
    throw InvalidArgument("force arrays must match the body count");
  const auto err = relative_errors(tree, direct);
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot write " + path.string());
  os << "id,a_tree,a_direct,rel_error\n" << std::setprecision(17);
  for (std::size_t i = 0; i < bodies.size(); ++i)
    os << bodies[i].id << ',' << tree[i].norm() << ',' << direct[i].norm() << ',' << err[i]
       << "\n";
}

}  // namespace examini::gravity
