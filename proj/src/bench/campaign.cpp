#include "examini/bench/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "examini/bench/metrics.hpp"
#include "examini/config/config.hpp"
#include "examini/core/comm.hpp"
#include "examini/core/version.hpp"
#include "examini/gravity/driver.hpp"
#include "examini/mhd/driver.hpp"
#include "examini/pic/driver.hpp"

namespace examini::bench {

namespace {

template <typename E, std::size_t N>
E lookup(const std::array<const char*, N>& names, const std::string& s, const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (s == names[i]) return E(i);
  throw InvalidArgument(std::string("unknown ") + what + " '" + s + "'");
}

constexpr std::array<const char*, 4> kApps{"mhd", "pic", "gravity", "synthetic"};
constexpr std::array<const char*, 3> kModes{"weak", "strong", "grouped_strong"};
constexpr std::array<const char*, 3> kClocks{"wall", "rank_cpu", "auto"};

/// (px, py) with px >= py, as square as possible.
std::array<int, 2> factor2(int ranks) {
  int py = int(std::sqrt(double(ranks)));
  while (ranks % py) --py;
  return {ranks / py, py};
}

std::string describe(const RunRequest& r) {
  return "app=" + to_string(r.app) + " ranks=" + std::to_string(r.ranks) +
         " resolution=" + resolution_string(r.size);
}

double synthetic_unit(double x) {
  for (int i = 0; i < 100000; ++i) x = x * 0.9999999 + 1e-7;
  return x;
}

RunSample run_synthetic(const RunRequest& req) {
  World world({.ranks = req.ranks, .workers = req.workers, .record_traces = true});
  std::vector<double> cpu(std::size_t(req.ranks), 0.0), sink(std::size_t(req.ranks), 0.0);
  const std::int64_t units = req.size[0];
  const auto t0 = wall_now_ns();
  world.run([&](Communicator& comm) {
    const auto c0 = thread_cpu_ns();
    const int r = comm.rank(), n = comm.size();
    const std::int64_t mine = units / n + (r < units % n ? 1 : 0);
    comm.set_region(std::string("Compute"));
    double x = 1.0 + 1e-3 * double(req.seed % 97);
    for (std::int64_t u = 0; u < mine; ++u) x = synthetic_unit(x);
    comm.set_region(std::nullopt);
    sink[std::size_t(r)] = x;
    cpu[std::size_t(r)] = 1e-9 * double(thread_cpu_ns() - c0);
  });
  RunSample s;
  s.wall_seconds = 1e-9 * double(wall_now_ns() - t0);
  s.rank_cpu_seconds = *std::max_element(cpu.begin(), cpu.end());
  s.timeline = world.timeline();
  return s;
}

json merged_config(const RunRequest& req) {
  json j = req.app_config.is_null() ? json::object() : req.app_config;
  j["seed"] = req.seed;
  j.erase("ranks");
  switch (req.app) {
    case App::Mhd: j["cells"] = req.size; break;
    case App::Pic:
      j["nx"] = req.size[0];
      j["ny"] = req.size[1];
      break;
    case App::Gravity: j["bodies"] = req.size[0]; break;
    case App::Synthetic: break;
  }
  return j;
}

json record_to_json(const TimingRecord& r) {
  return {{"app", to_string(r.app)},       {"mode", to_string(r.mode)},
          {"group", r.group},              {"rank_count", r.rank_count},
          {"resolution", r.resolution},    {"cells", r.cells},
          {"walltime", r.walltime},        {"samples", r.samples},
          {"kernels", r.kernels},          {"trace_path", r.trace_path}};
}

TimingRecord record_from_json(const json& j) {
  TimingRecord r;
  r.app = app_from_string(j.at("app").get<std::string>());
  r.mode = mode_from_string(j.at("mode").get<std::string>());
  r.group = j.at("group").get<int>();
  r.rank_count = j.at("rank_count").get<int>();
  r.resolution = j.at("resolution").get<std::string>();
  r.cells = j.at("cells").get<std::int64_t>();
  r.walltime = j.at("walltime").get<double>();
  r.samples = j.at("samples").get<std::vector<double>>();
  r.kernels = j.at("kernels").get<std::map<std::string, double>>();
  r.trace_path = j.at("trace_path").get<std::string>();
  return r;
}

}  // namespace

std::string to_string(App a) { return kApps[std::size_t(a)]; }
std::string to_string(Mode m) { return kModes[std::size_t(m)]; }
std::string to_string(Clock c) { return kClocks[std::size_t(c)]; }
App app_from_string(const std::string& s) { return lookup<App>(kApps, s, "app"); }
Mode mode_from_string(const std::string& s) { return lookup<Mode>(kModes, s, "mode"); }
Clock clock_from_string(const std::string& s) { return lookup<Clock>(kClocks, s, "clock"); }

std::string resolution_string(const Size3& s) {
  return std::to_string(s[0]) + "x" + std::to_string(s[1]) + "x" + std::to_string(s[2]);
}

std::int64_t volume(const Size3& s) { return s[0] * s[1] * s[2]; }

std::vector<int> GroupSpec::rank_counts() const {
  std::vector<int> r{base_ranks};
  for (int k = 0; k < kGroupDoublings; ++k) r.push_back(r.back() * 2);
  return r;
}

// ---------------------------------------------------------------- spec

void CampaignSpec::validate() const {
  if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
  auto check_size = [](const Size3& s) {
    for (auto v : s)
      if (v < 1) throw InvalidArgument("problem sizes must be positive");
  };
  if (mode == Mode::GroupedStrong) {
    if (groups.empty()) throw InvalidArgument("grouped_strong needs at least one group");
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].base_ranks < 1) throw InvalidArgument("group base_ranks must be >= 1");
      check_size(groups[g].size);
      if (g > 0 && groups[g].base_ranks <= groups[g - 1].base_ranks)
        throw InvalidArgument("group base_ranks must be strictly increasing");
      if (g > 0 && volume(groups[g].size) <= volume(groups[g - 1].size))
        throw InvalidArgument("group resolutions must grow across groups");
    }
    return;
  }
  if (!groups.empty()) throw InvalidArgument("groups are only valid in grouped_strong mode");
  if (rank_counts.empty()) throw InvalidArgument("rank_counts must not be empty");
  for (std::size_t i = 0; i < rank_counts.size(); ++i) {
    if (rank_counts[i] < 1) throw InvalidArgument("rank_counts must be >= 1");
    if (i > 0 && rank_counts[i] <= rank_counts[i - 1])
      throw InvalidArgument("rank_counts must be strictly increasing");
  }
  check_size(size);
}

Size3 CampaignSpec::global_size(int ranks) const {
  if (mode != Mode::Weak) return size;
  switch (app) {
    case App::Mhd: {
      const auto l = factor_ranks(ranks);
      return {size[0] * l.px, size[1] * l.py, size[2] * l.pz};
    }
    case App::Pic: {
      const auto f = factor2(ranks);
      return {size[0] * f[0], size[1] * f[1], size[2]};
    }
    default: return {size[0] * ranks, size[1], size[2]};
  }
}

CampaignSpec campaign_from_json(const json& j) {
  CampaignSpec s;
  std::vector<std::string> err;
  config::ObjectReader r(j, "", err);
  r.read("name", s.name);
  std::string v;
  if (r.read("app", v)) {
    r.check(std::count(kApps.begin(), kApps.end(), v) == 1, "app",
            "must be one of mhd, pic, gravity, synthetic");
    if (std::count(kApps.begin(), kApps.end(), v)) s.app = app_from_string(v);
  }
  if (r.read("mode", v)) {
    r.check(std::count(kModes.begin(), kModes.end(), v) == 1, "mode",
            "must be one of weak, strong, grouped_strong");
    if (std::count(kModes.begin(), kModes.end(), v)) s.mode = mode_from_string(v);
  }
  if (r.read("rank_counts", s.rank_counts)) {
    bool ok = !s.rank_counts.empty();
    for (std::size_t i = 0; i < s.rank_counts.size(); ++i)
      ok = ok && s.rank_counts[i] >= 1 && (i == 0 || s.rank_counts[i] > s.rank_counts[i - 1]);
    r.check(ok, "rank_counts", "must be a non-empty, strictly increasing list of positive integers");
  }
  if (r.read("size", s.size))
    r.check(std::all_of(s.size.begin(), s.size.end(), [](auto x) { return x >= 1; }), "size",
            "entries must be positive");
  if (const json* g = r.get("groups")) {
    if (!g->is_array()) {
      r.check(false, "groups", "must be an array");
    } else {
      for (std::size_t i = 0; i < g->size(); ++i) {
        GroupSpec gs;
        config::ObjectReader gr((*g)[i], "groups[" + std::to_string(i) + "]", err);
        if (gr.read("base_ranks", gs.base_ranks))
          gr.check(gs.base_ranks >= 1, "base_ranks", "must be >= 1");
        gr.read("size", gs.size);
        gr.finish();
        s.groups.push_back(gs);
      }
    }
  }
  if (r.read("repetitions", s.repetitions))
    r.check(s.repetitions >= 1, "repetitions", "must be >= 1");
  r.read("seed", s.seed);
  if (const json* a = r.get("app_config")) {
    r.check(a->is_object(), "app_config", "must be an object");
    if (a->is_object()) s.app_config = *a;
  }
  std::string ref;
  if (r.read("baseline_ref", ref)) s.baseline_ref = ref;
  r.finish();
  if (err.empty()) {
    try {
      s.validate();
    } catch (const InvalidArgument& e) {
      err.push_back(std::string("(campaign): ") + (e.what() + e.kind().size() + 2));
    }
  }
  if (!err.empty()) throw config::ValidationError(err);
  return s;
}

json to_json(const CampaignSpec& s) {
  json j{{"name", s.name},
         {"app", to_string(s.app)},
         {"mode", to_string(s.mode)},
         {"repetitions", s.repetitions},
         {"seed", s.seed},
         {"app_config", s.app_config}};
  if (s.mode == Mode::GroupedStrong) {
    j["groups"] = json::array();
    for (const auto& g : s.groups) j["groups"].push_back({{"base_ranks", g.base_ranks}, {"size", g.size}});
  } else {
    j["rank_counts"] = s.rank_counts;
    j["size"] = s.size;
  }
  if (s.baseline_ref) j["baseline_ref"] = *s.baseline_ref;
  return j;
}

// ---------------------------------------------------------------- machine

std::string MachineProfile::fingerprint() const {
  return cpu_model + " | workers=" + std::to_string(workers) + " | examini " + kVersion;
}

MachineProfile MachineProfile::detect() {
  MachineProfile m;
  std::ifstream is("/proc/cpuinfo");
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto p = line.find(':');
      if (p != std::string::npos) {
        m.cpu_model = line.substr(line.find_first_not_of(' ', p + 1));
        break;
      }
    }
  }
  if (m.cpu_model.empty()) m.cpu_model = "unknown";
  m.workers = std::max(1, int(std::thread::hardware_concurrency()));
  if (const char* w = std::getenv("EXAMINI_WORKERS")) {
    const int cap = std::atoi(w);
    if (cap >= 1) m.workers = std::min(m.workers, cap);
  }
  return m;
}

MachineProfile machine_from_json(const json& j) {
  MachineProfile m = MachineProfile::detect();
  std::vector<std::string> err;
  config::ObjectReader r(j, "", err);
  r.read("name", m.name);
  r.read("cpu_model", m.cpu_model);
  if (r.read("workers", m.workers)) r.check(m.workers >= 1, "workers", "must be >= 1");
  std::string c;
  if (r.read("clock", c)) {
    const bool ok = std::count(kClocks.begin(), kClocks.end(), c) == 1;
    r.check(ok, "clock", "must be one of wall, rank_cpu, auto");
    if (ok) m.clock = clock_from_string(c);
  }
  r.finish();
  if (!err.empty()) throw config::ValidationError(err);
  return m;
}

json to_json(const MachineProfile& m) {
  return {{"name", m.name},
          {"cpu_model", m.cpu_model},
          {"workers", m.workers},
          {"clock", to_string(m.clock)}};
}

Clock resolve_clock(Clock c, int max_ranks, int hardware_threads) {
  if (c != Clock::Auto) return c;
  return hardware_threads >= max_ranks ? Clock::Wall : Clock::RankCpu;
}

// ---------------------------------------------------------------- records

void TimingRecord::validate() const {
  if (!(walltime > 0.0)) throw InvalidArgument("walltime must be > 0");
  double sum = 0.0;
  for (const auto& [k, v] : kernels) sum += v;
  if (sum > 1.05 * walltime)
    throw InvalidArgument("kernel breakdown " + std::to_string(sum) +
                          " s exceeds walltime " + std::to_string(walltime) + " s by > 5%");
}

CampaignResult analyze(std::string name, App app, Mode mode, std::vector<TimingRecord> records) {
  if (records.empty()) throw InvalidArgument("no timing records");
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::pair(a.group, a.rank_count) < std::pair(b.group, b.rank_count);
  });
  CampaignResult res;
  res.name = std::move(name);
  res.app = app;
  res.mode = mode;
  std::optional<std::int64_t> per_rank;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    r.validate();
    const bool first = i == 0 || records[i - 1].group != r.group;
    if (!first && records[i - 1].rank_count == r.rank_count)
      throw InvalidArgument("duplicate rank count " + std::to_string(r.rank_count) + " in group " +
                            std::to_string(r.group));
    if (first) res.groups.push_back({r.group, r.rank_count, r.resolution, 1.0});
    auto& g = res.groups.back();
    const auto& base =
        *std::find_if(records.begin(), records.end(), [&](auto& x) { return x.group == r.group; });
    const double ratio = double(r.rank_count) / base.rank_count;
    double speedup, eff;
    if (mode == Mode::Weak) {
      if (r.cells % r.rank_count != 0 ||
          (per_rank && *per_rank != r.cells / r.rank_count))
        throw InvalidArgument("weak scaling needs constant cells per rank");
      per_rank = r.cells / r.rank_count;
      eff = weak_efficiency(base.walltime, r.walltime);
      speedup = eff * ratio;
    } else {
      if (r.resolution != base.resolution)
        throw InvalidArgument("strong scaling needs one resolution per group");
      speedup = compute_speedup(base.walltime, r.walltime);
      eff = strong_efficiency(base.walltime, base.rank_count, r.walltime, r.rank_count);
    }
    if (std::abs(eff - speedup / ratio) > 1e-12 * std::max(1.0, eff))
      throw InvalidArgument("efficiency is inconsistent with speedup / resource ratio");
    res.speedups.push_back(speedup);
    res.ideal.push_back(ratio);
    res.efficiencies.push_back(eff);
    g.min_efficiency = std::min(g.min_efficiency, eff);
  }
  res.records = std::move(records);
  return res;
}

json to_json(const CampaignResult& r) {
  json recs = json::array();
  for (const auto& x : r.records) recs.push_back(record_to_json(x));
  json groups = json::array();
  for (const auto& g : r.groups)
    groups.push_back({{"group", g.group},
                      {"base_ranks", g.base_ranks},
                      {"base_resolution", g.base_resolution},
                      {"min_efficiency", g.min_efficiency}});
  return {{"name", r.name},          {"app", to_string(r.app)},
          {"mode", to_string(r.mode)}, {"clock", r.clock},
          {"fingerprint", r.fingerprint}, {"records", recs},
          {"speedups", r.speedups},  {"ideal", r.ideal},
          {"efficiencies", r.efficiencies}, {"groups", groups}};
}

CampaignResult result_from_json(const json& j) {
  try {
    CampaignResult r;
    r.name = j.at("name").get<std::string>();
    r.app = app_from_string(j.at("app").get<std::string>());
    r.mode = mode_from_string(j.at("mode").get<std::string>());
    r.clock = j.at("clock").get<std::string>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    for (const auto& x : j.at("records")) r.records.push_back(record_from_json(x));
    r.speedups = j.at("speedups").get<std::vector<double>>();
    r.ideal = j.at("ideal").get<std::vector<double>>();
    r.efficiencies = j.at("efficiencies").get<std::vector<double>>();
    for (const auto& g : j.at("groups"))
      r.groups.push_back({g.at("group").get<int>(), g.at("base_ranks").get<int>(),
                          g.at("base_resolution").get<std::string>(),
                          g.at("min_efficiency").get<double>()});
    const auto n = r.records.size();
    if (r.speedups.size() != n || r.ideal.size() != n || r.efficiencies.size() != n)
      throw InvalidArgument("result arrays differ in length from records");
    return r;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed campaign result: ") + e.what());
  }
}

std::vector<Comparison> compare(const CampaignResult& ref, const CampaignResult& cand) {
  std::vector<Comparison> out;
  for (const auto& a : ref.records) {
    const auto it = std::find_if(cand.records.begin(), cand.records.end(), [&](auto& b) {
      return b.group == a.group && b.rank_count == a.rank_count;
    });
    if (it == cand.records.end()) continue;
    Comparison c{a.group, a.rank_count, a.walltime, it->walltime,
                 compute_speedup(a.walltime, it->walltime), {}};
    for (const auto& [k, t] : a.kernels)
      if (auto kt = it->kernels.find(k); kt != it->kernels.end())
        c.kernel_speedups[k] = compute_speedup(t, kt->second);
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------- runs

RunSample run_app(const RunRequest& req) {
  if (req.app == App::Synthetic) return run_synthetic(req);
  const json j = merged_config(req);
  switch (req.app) {
    case App::Mhd: {
      const auto cfg = config::mhd_from_json(j, req.ranks);
      auto r = mhd::run_mhd(cfg, req.ranks, {.workers = req.workers, .record_traces = true, .on_output = {}});
      return {r.timing.wall_seconds, r.timing.rank_cpu_seconds, std::move(r.timeline)};
    }
    case App::Pic: {
      const auto cfg = config::pic_from_json(j, req.ranks);
      auto r = pic::run_pic(cfg, req.ranks, cfg.cycles, {req.workers, true});
      return {r.timing.wall_seconds, r.timing.rank_cpu_seconds, std::move(r.timeline)};
    }
    case App::Gravity: {
      const auto cfg = config::gravity_from_json(j, req.ranks);
      auto r = gravity::run_gravity(cfg, req.ranks, req.workers, true);
      return {r.timing.wall_seconds, r.timing.rank_cpu_seconds, std::move(r.timeline)};
    }
    default: break;
  }
  throw InvalidArgument("unsupported app");
}

std::map<std::string, double> region_breakdown(const trace::TraceTimeline& tl, Clock clock,
                                               double rank_cpu_seconds) {
  std::map<std::string, double> out;
  if (tl.ranks() == 0) return out;
  if (clock != Clock::RankCpu) {
    for (std::size_t s = 0; s < tl.stream_count(); ++s)
      for (const auto& e : tl.stream(s))
        if (e.region) out[*e.region] += 1e-9 * double(e.duration());
  } else {
    // Wall-measured useful time includes preemption on a shared core; only
    // its split across regions is used.
    std::vector<std::map<std::string, double>> per(tl.ranks());
    std::vector<double> useful(tl.ranks(), 0.0);
    for (std::size_t s = 0; s < tl.stream_count(); ++s)
      for (const auto& e : tl.stream(s)) {
        if (e.state != trace::State::Useful) continue;
        const auto r = std::size_t(e.rank);
        useful[r] += double(e.duration());
        if (e.region) per[r][*e.region] += double(e.duration());
      }
    for (std::size_t r = 0; r < per.size(); ++r)
      for (const auto& [k, v] : per[r]) out[k] += rank_cpu_seconds * v / useful[r];
  }
  for (auto& [k, v] : out) v /= tl.ranks();
  return out;
}

CampaignResult run_campaign(const CampaignSpec& spec, const MachineProfile& machine,
                            const CampaignOptions& opts) {
  spec.validate();
  struct Config {
    int group;
    int ranks;
    Size3 size;
  };
  std::vector<Config> configs;
  if (spec.mode == Mode::GroupedStrong) {
    for (std::size_t g = 0; g < spec.groups.size(); ++g)
      for (int n : spec.groups[g].rank_counts()) configs.push_back({int(g) + 1, n, spec.groups[g].size});
  } else {
    for (int n : spec.rank_counts) configs.push_back({0, n, spec.global_size(n)});
  }
  int max_ranks = 1;
  for (const auto& c : configs) max_ranks = std::max(max_ranks, c.ranks);
  const int hw = std::max(1, int(std::thread::hardware_concurrency()));
  const Clock clock = resolve_clock(machine.clock, max_ranks, hw);
  // CPU-time accounting only stays honest if ranks do not share a core.
  const int workers = clock == Clock::RankCpu ? std::min(machine.workers, hw) : machine.workers;
  const Runner runner = opts.runner ? opts.runner : Runner(run_app);
  if (opts.trace_dir) std::filesystem::create_directories(*opts.trace_dir);

  std::vector<TimingRecord> records;
  for (const auto& c : configs) {
    RunRequest req{spec.app, c.ranks, c.size, spec.app_config, spec.seed, workers};
    TimingRecord rec;
    rec.app = spec.app;
    rec.mode = spec.mode;
    rec.group = c.group;
    rec.rank_count = c.ranks;
    rec.resolution = resolution_string(c.size);
    rec.cells = volume(c.size);
    std::vector<RunSample> runs;
    try {
      for (int k = 0; k < spec.repetitions; ++k) {
        runs.push_back(runner(req));
        rec.samples.push_back(clock == Clock::Wall ? runs.back().wall_seconds
                                                   : runs.back().rank_cpu_seconds);
      }
    } catch (const Error& e) {
      const std::string w = e.what();
      throw Error(e.kind(), w.substr(e.kind().size() + 2) + " [" + describe(req) + "]");
    }
    rec.walltime = median(rec.samples);
    // Breakdown from the repetition closest to the median.
    std::size_t pick = 0;
    for (std::size_t k = 1; k < rec.samples.size(); ++k)
      if (std::abs(rec.samples[k] - rec.walltime) < std::abs(rec.samples[pick] - rec.walltime))
        pick = k;
    rec.kernels = region_breakdown(runs[pick].timeline, clock, runs[pick].rank_cpu_seconds);
    if (opts.trace_dir) {
      const auto path = *opts.trace_dir / (to_string(spec.app) + "_g" + std::to_string(c.group) +
                                           "_r" + std::to_string(c.ranks) + ".jsonl");
      trace::write_trace(path, runs[pick].timeline);
      rec.trace_path = path.string();
    }
    if (opts.on_record) opts.on_record(rec);
    records.push_back(std::move(rec));
  }
  auto res = analyze(spec.name, spec.app, spec.mode, std::move(records));
  res.clock = to_string(clock);
  res.fingerprint = machine.fingerprint();
  return res;
}

}  // namespace examini::bench
