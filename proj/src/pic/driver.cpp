#include "examini/pic/driver.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>

#include "examini/core/comm.hpp"

namespace examini::pic {

namespace {

constexpr int kMigrateTag = 8000;
constexpr int kGatherTag = 8100;
constexpr int kAttrs = 7;  // x, y, vx, vy, vz, q, id

void pack(const Species& s, Eigen::Index p, std::vector<double>& out) {
  out.insert(out.end(), {s.x[p], s.y[p], s.vx[p], s.vy[p], s.vz[p], s.q[p],
                         double(s.id[std::size_t(p)])});
}

void unpack_append(Species& s, const std::vector<double>& buf) {
  const std::size_t n0 = s.size(), m = buf.size() / kAttrs;
  s.resize(n0 + m);
  for (std::size_t k = 0; k < m; ++k) {
    const double* b = buf.data() + k * kAttrs;
    const auto p = Eigen::Index(n0 + k);
    s.x[p] = b[0];
    s.y[p] = b[1];
    s.vx[p] = b[2];
    s.vy[p] = b[3];
    s.vz[p] = b[4];
    s.q[p] = b[5];
    s.id[n0 + k] = std::uint64_t(b[6]);
  }
}

/// Sends every particle that left this rank's cells to its new owner and
/// appends arrivals in source-rank order. Returns the number sent.
std::uint64_t migrate(Communicator& comm, const PicConfig& cfg, const PicLayout& layout,
                      ParticleSet& ps) {
  const int n = comm.size();
  std::uint64_t sent = 0;
  if (n == 1) return 0;
  for (std::size_t s = 0; s < ps.species.size(); ++s) {
    Species& sp = ps.species[s];
    std::vector<std::vector<double>> out(std::size_t(n), std::vector<double>{});
    std::vector<Eigen::Index> keep;
    keep.reserve(sp.size());
    for (Eigen::Index p = 0; p < Eigen::Index(sp.size()); ++p) {
      const int dst = layout.owner(cfg, sp.x[p], sp.y[p]);
      if (dst == comm.rank()) {
        keep.push_back(p);
      } else {
        pack(sp, p, out[std::size_t(dst)]);
        ++sent;
      }
    }
    const int tag = kMigrateTag + int(s);
    for (int r = 0; r < n; ++r)
      if (r != comm.rank()) comm.send_values<double>(r, tag, out[std::size_t(r)]);

    Species kept;
    kept.name = sp.name;
    kept.qom = sp.qom;
    kept.resize(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const auto p = keep[k], q = Eigen::Index(k);
      kept.x[q] = sp.x[p];
      kept.y[q] = sp.y[p];
      kept.vx[q] = sp.vx[p];
      kept.vy[q] = sp.vy[p];
      kept.vz[q] = sp.vz[p];
      kept.q[q] = sp.q[p];
      kept.id[k] = sp.id[std::size_t(p)];
    }
    for (int r = 0; r < n; ++r)
      if (r != comm.rank()) unpack_append(kept, comm.recv_values<double>(r, tag));
    sp = std::move(kept);
  }
  return sent;
}

Moments global_moments(Communicator& comm, const ParticleSet& ps, const FieldGrid& g) {
  Moments m = gather_moments(ps, g);
  if (comm.size() > 1) {
    const auto flat = m.flatten();
    m.assign(comm.allreduce_sum(std::span<const double>(flat)));
  }
  return m;
}

double global_kinetic(Communicator& comm, const ParticleSet& ps) {
  double ke = 0.0;
  for (const auto& s : ps.species) ke += kinetic_energy(s);
  return comm.size() > 1 ? comm.allreduce_sum(ke) : ke;
}

void sort_by_id(Species& s) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.id[a] < s.id[b]; });
  Species out;
  out.name = s.name;
  out.qom = s.qom;
  out.resize(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto p = Eigen::Index(order[k]), q = Eigen::Index(k);
    out.x[q] = s.x[p];
    out.y[q] = s.y[p];
    out.vx[q] = s.vx[p];
    out.vy[q] = s.vy[p];
    out.vz[q] = s.vz[p];
    out.q[q] = s.q[p];
    out.id[k] = s.id[order[k]];
  }
  s = std::move(out);
}

/// Collective; the full particle set is assembled on rank 0.
ParticleSet gather_particles(Communicator& comm, const ParticleSet& ps) {
  if (comm.rank() != 0) {
    for (std::size_t s = 0; s < ps.species.size(); ++s) {
      std::vector<double> buf;
      for (Eigen::Index p = 0; p < Eigen::Index(ps.species[s].size()); ++p)
        pack(ps.species[s], p, buf);
      comm.send_values<double>(0, kGatherTag + int(s), buf);
    }
    return {};
  }
  ParticleSet all = ps;
  for (std::size_t s = 0; s < all.species.size(); ++s) {
    for (int r = 1; r < comm.size(); ++r)
      unpack_append(all.species[s], comm.recv_values<double>(r, kGatherTag + int(s)));
    sort_by_id(all.species[s]);
  }
  return all;
}

}  // namespace

PicResult run_pic(const PicConfig& cfg, int ranks, int cycles, const PicRunOptions& opts) {
  cfg.validate(ranks);
  if (cycles < 0) throw InvalidArgument("cycles must be >= 0");
  const PicLayout layout = pic_layout(cfg, ranks);
  std::vector<double> qom;
  for (const auto& s : cfg.species) qom.push_back(s.qom);

  World world({.ranks = ranks, .workers = opts.workers, .record_traces = opts.record_traces});
  PicResult result;
  // seconds[rank][cycle * 3 + kernel]
  std::vector<std::vector<double>> seconds(std::size_t(ranks),
                                           std::vector<double>(std::size_t(cycles) * 3, 0.0));
  std::vector<double> cpu(std::size_t(ranks), 0.0);
  std::mutex mu;

  const auto t0 = wall_now_ns();
  world.run([&](Communicator& comm) {
    const auto c0 = thread_cpu_ns();
    auto& secs = seconds[std::size_t(comm.rank())];
    comm.set_region(std::string("Init"));
    ParticleSet ps;
    for (int s = 0; s < int(cfg.species.size()); ++s)
      ps.species.push_back(init_species(cfg, s, layout.cells(cfg, comm.rank())));
    FieldGrid fields = initial_fields(cfg);
    Moments moments = global_moments(comm, ps, fields);
    std::vector<PicEnergy> history{{0, fields.energy(), global_kinetic(comm, ps), 0, 0.0}};
    std::uint64_t sent = 0;

    for (int c = 0; c < cycles; ++c) {
      auto kernel = [&](int k, auto&& body) {
        comm.set_region(std::string(kKernelNames[k]));
        const auto k0 = wall_now_ns();
        body();
        secs[std::size_t(c) * 3 + std::size_t(k)] = 1e-9 * double(wall_now_ns() - k0);
      };
      FieldSolveStats stats;
      try {
        // Particles see E^{n+theta} and B^n.
        FieldGrid push = fields;
        kernel(0, [&] {
          stats = field_solve(fields, moments, qom, cfg.dt, cfg.theta, cfg.gmres);
          push.E = std::move(stats.e_theta);
        });
        kernel(1, [&] {
          particle_mover(ps, push, cfg.dt, cfg.mover_iterations);
          sent += migrate(comm, cfg, layout, ps);
        });
      } catch (const GmresNoConvergence& e) {
        throw GmresNoConvergence(e.residual(), e.iterations(), "cycle " + std::to_string(c + 1));
      } catch (const NonFiniteParticle& e) {
        const std::string what = e.what();
        throw NonFiniteParticle(what.substr(e.kind().size() + 2) + ", cycle " +
                                std::to_string(c + 1));
      }
      kernel(2, [&] { moments = global_moments(comm, ps, fields); });
      comm.set_region(std::string("Diagnostics"));
      history.push_back({c + 1, fields.energy(), global_kinetic(comm, ps), stats.iterations,
                         stats.residual});
    }

    comm.set_region(std::string("Output"));
    ParticleSet all = gather_particles(comm, ps);
    const double total_sent = comm.allreduce_sum(double(sent));
    comm.set_region(std::nullopt);
    comm.mark();
    const auto c1 = thread_cpu_ns();
    std::lock_guard lock(mu);
    cpu[std::size_t(comm.rank())] = 1e-9 * double(c1 - c0);
    if (comm.rank() == 0) {
      result.state = {cycles, std::move(fields), std::move(moments), std::move(all)};
      result.history = std::move(history);
      result.migrated = std::uint64_t(total_sent);
    }
  });
  result.timing.wall_seconds = 1e-9 * double(wall_now_ns() - t0);
  result.timing.rank_cpu_seconds = *std::max_element(cpu.begin(), cpu.end());
  for (int c = 0; c < cycles; ++c) {
    for (int k = 0; k < 3; ++k)
      for (int r = 0; r < ranks; ++r)
        result.timing.kernels.push_back(
            {c + 1, kKernelNames[k], r, seconds[std::size_t(r)][std::size_t(c) * 3 + std::size_t(k)]});
  }
  result.timeline = world.timeline();
  return result;
}

void write_kernel_csv(const std::vector<KernelTiming>& k, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot write " + path.string());
  os << "cycle,kernel,rank,seconds\n" << std::setprecision(9);
  for (const auto& t : k) os << t.cycle << ',' << t.kernel << ',' << t.rank << ',' << t.seconds << "\n";
}

void write_energy_csv(const std::vector<PicEnergy>& h, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot write " + path.string());
  os << "cycle,field,kinetic,total,gmres_iterations,gmres_residual\n" << std::setprecision(17);
  for (const auto& e : h)
    os << e.cycle << ',' << e.field << ',' << e.kinetic << ',' << e.total() << ','
       << e.gmres_iterations << ',' << e.gmres_residual << "\n";
}

}  // namespace examini::pic
