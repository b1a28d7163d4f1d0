#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "examini/trace/trace.hpp"

namespace examini::trace {

EXAMINI_DEFINE_ERROR(UnmatchedMessage);
EXAMINI_DEFINE_ERROR(MissingDependency);
EXAMINI_DEFINE_ERROR(MissingCounters);

/// Rescheduled timeline on an ideal network (infinite bandwidth, zero
/// latency). Non-communication time, traced or not, keeps its duration;
/// a message is available at the start of its SEND; receives complete at
/// max(arrival, availability); collectives and barriers complete at the
/// latest participant arrival.
struct ReplayResult {
  Nanos runtime_ideal = 0;
  TraceTimeline timeline;
};

/// Throws UnmatchedMessage when a receive has no matching send (matched by
/// source, destination, tag and order), a send is never received, or a
/// collective is missing participants.
ReplayResult ideal_network_replay(const TraceTimeline& tl);

/// One node of the POP multiplicative metric tree. Values are fractions.
struct Efficiencies {
  double load_balance = 1.0;
  double communication_efficiency = 1.0;
  double parallel_efficiency = 1.0;
  std::optional<double> serialization_efficiency;
  std::optional<double> transfer_efficiency;
  double omp_communication_efficiency = 1.0;
  std::optional<double> computation_scalability;
  std::optional<double> instruction_scalability;
  std::optional<double> global_efficiency;

  // Inputs, kept for reporting.
  Nanos runtime = 0;
  std::optional<Nanos> runtime_ideal;
  double useful_mean = 0.0;
  Nanos useful_max = 0;
  Nanos useful_sum = 0;
};

struct EfficiencyReport {
  Efficiencies global;
  std::map<std::string, Efficiencies> regions;
};

struct PopOptions {
  /// Restrict the report to one region label (global entry then covers
  /// only that region); all regions are reported otherwise.
  std::optional<std::string> region;
  /// Run the ideal-network replay and report SerE/TE.
  bool ideal_replay = true;
  /// Reference trace for CompS/InstrS (and GE).
  const TraceTimeline* base = nullptr;
};

/// LB = mean(useful)/max(useful), CommE = max(useful)/T, PE = mean(useful)/T,
/// SerE = max(useful)/T_ideal, TE = T_ideal/T. "useful" is per processing
/// unit (rank, thread). OCE averages, over ranks, the thread-summed
/// useful / (useful + OMP_RUNTIME).
EfficiencyReport compute_pop_metrics(const TraceTimeline& tl,
                                     const PopOptions& opts = {});

struct Scalability {
  double computation = 1.0;
  std::optional<double> instruction;
};

/// CompS = sum useful(base) / sum useful(scaled); InstrS likewise over
/// instruction counters, omitted when either trace lacks them.
Scalability compute_scalability(const TraceTimeline& base,
                                const TraceTimeline& scaled,
                                const std::optional<std::string>& region = {});

/// Strict variant: throws MissingCounters when counters are absent.
double instruction_scalability(const TraceTimeline& base,
                               const TraceTimeline& scaled);

struct AntipatternParams {
  std::size_t min_run = 5;
  std::int64_t max_bytes = 1024;
  Nanos max_gap = 1000;
};

/// A barrier-bounded run of small point-to-point messages with (almost) no
/// computation in between.
struct LatencyFinding {
  int thread = 0;
  int segment = 0;  // index of the opening barrier on the stream
  int ordinal = 0;  // run number within the segment
  std::size_t run_length = 0;
  Nanos accumulated_latency = 0;
  Nanos t_start = 0;
  Nanos t_end = 0;
  std::set<int> ranks;
};

std::vector<LatencyFinding> detect_latency_antipattern(
    const TraceTimeline& tl, const AntipatternParams& params = {});

nlohmann::json to_json(const Efficiencies& e);
nlohmann::json to_json(const EfficiencyReport& r);
nlohmann::json to_json(const LatencyFinding& f);
/// CSV rows (region, metric, value); the global entry uses region "ALL".
std::string to_csv(const EfficiencyReport& r);

}  // namespace examini::trace
