#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "examini/mhd/solver.hpp"
#include "examini/trace/trace.hpp"

namespace examini::mhd {

/// Interior fields of the whole domain, x fastest. Face arrays hold the
/// lower face of every cell (CT mode only).
struct GlobalField {
  std::array<int, 3> cells{};
  double time = 0.0;
  std::array<std::vector<double>, NVAR> u;
  std::array<std::vector<double>, 3> faces;

  std::size_t index(int i, int j, int k) const {
    return (std::size_t(k) * cells[1] + j) * cells[0] + i;
  }
  bool operator==(const GlobalField&) const = default;
};

struct MhdTiming {
  double wall_seconds = 0.0;
  double rank_cpu_seconds = 0.0;  // max over ranks of thread CPU time
  int steps = 0;
  std::map<std::string, double> region_seconds;  // summed over ranks
};

struct MhdRunOptions {
  int workers = 0;  // 0: default_workers()
  bool record_traces = true;
  /// Invoked on rank 0 with the gathered state every `output_every` steps.
  std::function<void(int step, const GlobalField&)> on_output;
};

struct MhdResult {
  GlobalField state;
  std::vector<MhdDiagnostics> history;  // entry 0 is the initial state
  MhdCounters counters;                 // summed over ranks
  trace::TraceTimeline timeline;
  MhdTiming timing;
};

/// Runs the configured problem on `ranks` in-process ranks. Deterministic
/// for fixed (config, ranks); interior fields do not depend on the rank
/// count. Solver errors are rethrown with the step number.
MhdResult run_mhd(const MhdConfig& cfg, int ranks, const MhdRunOptions& opts = {});

/// Binary dump (raw float64, x fastest) plus a JSON header
/// `<stem>.json` describing shape, extent, time and variable order.
void write_field_dump(const GlobalField& f, const GridSpec& grid,
                      const std::filesystem::path& stem);
/// CSV time series of conserved totals and div B norms.
void write_conserved_csv(const std::vector<MhdDiagnostics>& history,
                         const std::filesystem::path& path);

}  // namespace examini::mhd
