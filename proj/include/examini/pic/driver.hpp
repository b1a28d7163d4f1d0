#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "examini/pic/field.hpp"
#include "examini/pic/kernels.hpp"
#include "examini/trace/trace.hpp"

namespace examini::pic {

inline constexpr const char* kKernelNames[3] = {"CalculateField", "ParticlesMover",
                                                "GatherMoments"};

/// Global state after a run. Particles of every species are sorted by id.
struct PicState {
  int cycle = 0;
  FieldGrid fields;
  Moments moments;
  ParticleSet particles;
};

struct PicEnergy {
  int cycle = 0;
  double field = 0.0;
  double kinetic = 0.0;
  int gmres_iterations = 0;
  double gmres_residual = 0.0;

  double total() const { return field + kinetic; }
};

/// One kernel of one cycle on one rank.
struct KernelTiming {
  int cycle = 0;
  std::string kernel;
  int rank = 0;
  double seconds = 0.0;
};

struct PicTiming {
  double wall_seconds = 0.0;
  double rank_cpu_seconds = 0.0;  // max over ranks of thread CPU time
  std::vector<KernelTiming> kernels;  // ordered by cycle, kernel, rank
};

struct PicRunOptions {
  int workers = 0;
  bool record_traces = true;
};

struct PicResult {
  PicState state;
  std::vector<PicEnergy> history;  // entry 0 is the initial state
  std::uint64_t migrated = 0;      // particles sent between ranks
  trace::TraceTimeline timeline;
  PicTiming timing;
};

/// Runs `cycles` iterations of field solve, particle push and moment
/// gathering on `ranks` in-process ranks. Fields are solved redundantly
/// from allreduced moments; particles migrate to the rank owning their
/// cell after every push. Kernel errors are rethrown with the cycle index.
PicResult run_pic(const PicConfig& cfg, int ranks, int cycles,
                  const PicRunOptions& opts = {});

void write_kernel_csv(const std::vector<KernelTiming>& k, const std::filesystem::path& path);
void write_energy_csv(const std::vector<PicEnergy>& h, const std::filesystem::path& path);

}  // namespace examini::pic
