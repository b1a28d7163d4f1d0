#include "examini/mhd/driver.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>

#include <json.hpp>

#include "examini/mhd/problems.hpp"

namespace examini::mhd {

namespace {

constexpr int kGatherTag = 7000;

/// Interior cell data and lower faces of one block, variable-major.
std::vector<double> pack_interior(const MhdBlock& b, bool ct) {
  const auto& geo = b.geo;
  std::vector<double> out;
  const int nfields = NVAR + (ct ? 3 : 0);
  out.reserve(std::size_t(nfields) * geo.n[0] * geo.n[1] * geo.n[2]);
  for (int q = 0; q < nfields; ++q) {
    const BlockField& f = q < NVAR ? b.u[q] : b.faces[q - NVAR];
    for (int k = 0; k < geo.n[2]; ++k)
      for (int j = 0; j < geo.n[1]; ++j)
        for (int i = 0; i < geo.n[0]; ++i) out.push_back(f[geo.index(i, j, k)]);
  }
  return out;
}

void unpack_interior(const std::vector<double>& buf, const BlockGeometry& geo,
                     bool ct, GlobalField& g) {
  const int nfields = NVAR + (ct ? 3 : 0);
  std::size_t p = 0;
  for (int q = 0; q < nfields; ++q) {
    auto& dst = q < NVAR ? g.u[q] : g.faces[q - NVAR];
    for (int k = 0; k < geo.n[2]; ++k)
      for (int j = 0; j < geo.n[1]; ++j)
        for (int i = 0; i < geo.n[0]; ++i)
          dst[g.index(geo.offset[0] + i, geo.offset[1] + j, geo.offset[2] + k)] =
              buf.at(p++);
  }
}

/// Collective; the assembled field is only meaningful on rank 0.
GlobalField gather(Communicator& comm, const MhdConfig& cfg, const MhdBlock& b) {
  const bool ct = cfg.divb == DivBMode::CT;
  GlobalField g;
  if (comm.rank() != 0) {
    comm.send_values<double>(0, kGatherTag, pack_interior(b, ct));
    return g;
  }
  g.cells = cfg.grid.global_cells;
  g.time = b.time;
  const std::size_t total = std::size_t(g.cells[0]) * g.cells[1] * g.cells[2];
  for (auto& v : g.u) v.assign(total, 0.0);
  if (ct)
    for (auto& v : g.faces) v.assign(total, 0.0);
  unpack_interior(pack_interior(b, ct), b.geo, ct, g);
  for (int r = 1; r < comm.size(); ++r)
    unpack_interior(comm.recv_values<double>(r, kGatherTag),
                    block_geometry(cfg.grid, r), ct, g);
  return g;
}

template <typename E>
[[noreturn]] void rethrow_at_step(const E& e, int step) {
  throw E(e, "step " + std::to_string(step));
}

}  // namespace

MhdResult run_mhd(const MhdConfig& cfg_in, int ranks, const MhdRunOptions& opts) {
  MhdConfig cfg = cfg_in;
  if (cfg.grid.rank_layout.size() != ranks) cfg.grid.rank_layout = factor_ranks(ranks);
  cfg.validate(ranks);

  World world({.ranks = ranks,
               .workers = opts.workers,
               .record_traces = opts.record_traces});
  MhdResult result;
  std::vector<double> cpu(ranks, 0.0);
  std::mutex mu;

  const auto t0 = wall_now_ns();
  world.run([&](Communicator& comm) {
    const auto c0 = thread_cpu_ns();
    comm.set_region(std::string("Init"));
    const BlockGeometry geo = block_geometry(cfg.grid, comm.rank());
    MhdSolver solver(cfg, init_problem(cfg, geo), &comm);
    std::vector<MhdDiagnostics> history;
    comm.set_region(std::string("Diagnostics"));
    history.push_back(solver.diagnostics());

    int step = 0;
    const double t_stop = cfg.t_end * (1.0 - 1e-14);
    while (step < cfg.max_steps && solver.block().time < t_stop) {
      try {
        comm.set_region(std::string("Timestep"));
        const double dt = solver.compute_dt();
        solver.rk3_step(dt);
        ++step;
        comm.set_region(std::string("Diagnostics"));
        MhdDiagnostics d = solver.diagnostics();
        d.dt = dt;
        history.push_back(d);
      } catch (const NegativePressure& e) {
        rethrow_at_step(e, step + 1);
      } catch (const NegativeDensity& e) {
        rethrow_at_step(e, step + 1);
      }
      if (opts.on_output && cfg.output_every > 0 && step % cfg.output_every == 0) {
        comm.set_region(std::string("Output"));
        GlobalField g = gather(comm, cfg, solver.block());
        if (comm.rank() == 0) opts.on_output(step, g);
      }
    }

    comm.set_region(std::string("Output"));
    GlobalField g = gather(comm, cfg, solver.block());
    const auto& cnt = solver.counters();
    const std::array<double, 4> local{double(cnt.pressure_floors),
                                      double(cnt.reconstruction_fallbacks),
                                      double(cnt.riemann.calls),
                                      double(cnt.riemann.hll_fallbacks)};
    const auto tot = comm.allreduce_sum(std::span<const double>(local));
    comm.set_region(std::nullopt);
    comm.mark();
    const auto c1 = thread_cpu_ns();
    std::lock_guard lock(mu);
    cpu[comm.rank()] = 1e-9 * double(c1 - c0);
    if (comm.rank() == 0) {
      result.state = std::move(g);
      result.history = std::move(history);
      result.counters.pressure_floors = std::uint64_t(tot[0]);
      result.counters.reconstruction_fallbacks = std::uint64_t(tot[1]);
      result.counters.riemann.calls = std::uint64_t(tot[2]);
      result.counters.riemann.hll_fallbacks = std::uint64_t(tot[3]);
      result.timing.steps = step;
    }
  });
  result.timing.wall_seconds = 1e-9 * double(wall_now_ns() - t0);
  for (double c : cpu) result.timing.rank_cpu_seconds = std::max(result.timing.rank_cpu_seconds, c);
  result.timeline = world.timeline();
  for (std::size_t s = 0; s < result.timeline.stream_count(); ++s)
    for (const auto& e : result.timeline.stream(s))
      if (e.region) result.timing.region_seconds[*e.region] += 1e-9 * double(e.duration());
  return result;
}

void write_field_dump(const GlobalField& f, const GridSpec& grid,
                      const std::filesystem::path& stem) {
  static const char* names[NVAR] = {"rho", "mx", "my", "mz", "E",
                                    "Bx",  "By", "Bz", "psi"};
  nlohmann::json header;
  header["shape"] = {f.cells[0], f.cells[1], f.cells[2]};
  header["extent"] = grid.extent;
  header["time"] = f.time;
  header["dtype"] = "float64";
  header["order"] = "x-fastest, variable-major";
  std::vector<std::string> vars(names, names + NVAR);
  if (!f.faces[0].empty())
    for (const char* n : {"bx_face", "by_face", "bz_face"}) vars.push_back(n);
  header["variables"] = vars;

  auto bin = stem;
  bin += ".bin";
  header["data"] = bin.filename().string();
  std::ofstream os(bin, std::ios::binary);
  if (!os) throw IoFailure("cannot write " + bin.string());
  for (const auto& v : f.u)
    os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
  if (!f.faces[0].empty())
    for (const auto& v : f.faces)
      os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
  if (!os) throw IoFailure("short write to " + bin.string());

  auto js = stem;
  js += ".json";
  std::ofstream hs(js);
  if (!hs) throw IoFailure("cannot write " + js.string());
  hs << header.dump(2) << "\n";
}

void write_conserved_csv(const std::vector<MhdDiagnostics>& history,
                         const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot write " + path.string());
  os << "step,time,dt,mass,mx,my,mz,energy,divb_max,divb_l2\n";
  os << std::setprecision(17);
  for (std::size_t s = 0; s < history.size(); ++s) {
    const auto& d = history[s];
    os << s << ',' << d.time << ',' << d.dt << ',' << d.mass << ','
       << d.momentum[0] << ',' << d.momentum[1] << ',' << d.momentum[2] << ','
       << d.energy << ',' << d.divb_max << ',' << d.divb_l2 << "\n";
  }
}

}  // namespace examini::mhd
