#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "examini/trace/trace.hpp"

namespace examini::bench {

using nlohmann::json;

enum class App { Mhd, Pic, Gravity, Synthetic };
enum class Mode { Weak, Strong, GroupedStrong };
enum class Clock { Wall, RankCpu, Auto };

std::string to_string(App a);
std::string to_string(Mode m);
std::string to_string(Clock c);
App app_from_string(const std::string& s);
Mode mode_from_string(const std::string& s);
Clock clock_from_string(const std::string& s);

/// Problem size as (x, y, z) extents. MHD: cells; PIC: nx, ny, 1;
/// gravity: bodies, 1, 1; synthetic: work units, 1, 1.
using Size3 = std::array<std::int64_t, 3>;
std::string resolution_string(const Size3& s);
std::int64_t volume(const Size3& s);

/// A strong-scaling group: global size fixed, ranks base, 2b, 4b, 8b.
struct GroupSpec {
  int base_ranks = 1;
  Size3 size{1, 1, 1};

  std::vector<int> rank_counts() const;
};

inline constexpr int kGroupDoublings = 3;

/// What to run. Host details live in MachineProfile, never here.
struct CampaignSpec {
  std::string name = "campaign";
  App app = App::Synthetic;
  Mode mode = Mode::Strong;
  std::vector<int> rank_counts{1};  // weak / strong
  Size3 size{1, 1, 1};              // per rank (weak) or global (strong)
  std::vector<GroupSpec> groups;    // grouped_strong
  int repetitions = 3;
  std::uint64_t seed = 1;
  json app_config = json::object();  // app schema fields other than size/seed
  std::optional<std::string> baseline_ref;

  /// Throws InvalidArgument.
  void validate() const;
  /// Global problem size at `ranks` for weak/strong modes.
  Size3 global_size(int ranks) const;
};

CampaignSpec campaign_from_json(const json& j);  // config::ValidationError
json to_json(const CampaignSpec& s);

struct MachineProfile {
  std::string name = "local";
  std::string cpu_model;
  int workers = 1;
  Clock clock = Clock::Auto;

  /// CPU model, worker count and artifact version.
  std::string fingerprint() const;
  /// Reads the CPU model and core count of this host. EXAMINI_WORKERS caps
  /// the worker count.
  static MachineProfile detect();
};

MachineProfile machine_from_json(const json& j);  // missing fields from detect()
json to_json(const MachineProfile& m);

/// The clock actually used: Auto resolves to Wall when the host has a core
/// per rank and to RankCpu otherwise.
Clock resolve_clock(Clock c, int max_ranks, int hardware_threads);

struct TimingRecord {
  App app = App::Synthetic;
  Mode mode = Mode::Strong;
  int group = 0;  // 1-based in grouped_strong, 0 otherwise
  int rank_count = 1;
  std::string resolution;
  std::int64_t cells = 0;
  double walltime = 0.0;          // seconds, median of samples
  std::vector<double> samples;    // one per repetition
  std::map<std::string, double> kernels;  // region -> seconds
  std::string trace_path;

  /// walltime > 0 and kernels sum <= walltime + 5%. Throws InvalidArgument.
  void validate() const;
  bool operator==(const TimingRecord&) const = default;
};

struct GroupSummary {
  int group = 0;
  int base_ranks = 1;
  std::string base_resolution;
  double min_efficiency = 0.0;
  bool operator==(const GroupSummary&) const = default;
};

/// Speedup, ideal speedup and efficiency per record, relative to the
/// smallest rank count of the record's group. Weak mode reports the scaled
/// speedup (efficiency times the rank ratio).
struct CampaignResult {
  std::string name;
  App app = App::Synthetic;
  Mode mode = Mode::Strong;
  std::string clock;
  std::string fingerprint;
  std::vector<TimingRecord> records;
  std::vector<double> speedups, ideal, efficiencies;
  std::vector<GroupSummary> groups;

  bool operator==(const CampaignResult&) const = default;
};

/// Result pipeline over recorded times. Records of one group must share a
/// resolution in strong modes; weak mode asserts constant cells per rank.
/// Throws InvalidArgument / NonPositiveTime.
CampaignResult analyze(std::string name, App app, Mode mode, std::vector<TimingRecord> records);

json to_json(const CampaignResult& r);
CampaignResult result_from_json(const json& j);

/// Per-configuration comparison of two campaigns (e.g. CPU vs GPU times):
/// speedup = t_ref / t_new for the total and for every shared kernel.
struct Comparison {
  int group = 0;
  int rank_count = 1;
  double t_ref = 0.0, t_new = 0.0;
  double speedup = 0.0;
  std::map<std::string, double> kernel_speedups;
};
std::vector<Comparison> compare(const CampaignResult& ref, const CampaignResult& cand);

struct RunRequest {
  App app = App::Synthetic;
  int ranks = 1;
  Size3 size{1, 1, 1};
  json app_config = json::object();
  std::uint64_t seed = 1;
  int workers = 0;
};

struct RunSample {
  double wall_seconds = 0.0;
  double rank_cpu_seconds = 0.0;
  trace::TraceTimeline timeline;
};

using Runner = std::function<RunSample(const RunRequest&)>;

/// Runs one configuration of a built-in app.
RunSample run_app(const RunRequest& req);

/// Per-region breakdown of a run. Wall: mean over ranks of the time spent in
/// each region, every state counted. RankCpu: `rank_cpu_seconds` split by
/// each rank's share of useful time per region, averaged over ranks, so the
/// breakdown and the walltime share one time base.
std::map<std::string, double> region_breakdown(const trace::TraceTimeline& tl, Clock clock,
                                               double rank_cpu_seconds = 0.0);

struct CampaignOptions {
  std::optional<std::filesystem::path> trace_dir;  // write one trace per config
  Runner runner;  // defaults to run_app
  std::function<void(const TimingRecord&)> on_record;
};

/// Executes every configuration sequentially, `repetitions` times each,
/// keeping the median under the machine's clock. App errors are rethrown
/// with the configuration appended.
CampaignResult run_campaign(const CampaignSpec& spec, const MachineProfile& machine,
                            const CampaignOptions& opts = {});

}  // namespace examini::bench
