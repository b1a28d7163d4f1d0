#include "examini/cli/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "examini/bench/campaign.hpp"
#include "examini/bench/metrics.hpp"
#include "examini/bench/regression.hpp"
#include "examini/bench/report.hpp"
#include "examini/config/config.hpp"
#include "examini/core/comm.hpp"
#include "examini/core/version.hpp"
#include "examini/gravity/driver.hpp"
#include "examini/mhd/driver.hpp"
#include "examini/pic/driver.hpp"
#include "examini/trace/pop.hpp"

namespace examini::cli {

namespace fs = std::filesystem;
using config::json;

namespace {

/// Bad input discovered after argument parsing (unreadable config etc.).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<int> ranks;
  std::optional<std::uint64_t> seed;
  int verbosity = 0;
  // trace analyze
  std::string in;
  bool ideal_replay = false;
  std::optional<std::string> region;
  // campaign / report
  std::optional<std::string> machine;
  std::optional<std::string> baseline_dir;
  bool update_baselines = false;
  double tolerance = 10.0;
  std::string format = "both";
};

json read_config(const Options& o) {
  json j;
  try {
    j = config::load_json(o.config);
  } catch (const IoFailure& e) {
    throw UsageError(e.what());
  }
  if (!j.is_object()) throw config::ValidationError({"(root): must be an object"});
  if (o.ranks) j["ranks"] = *o.ranks;
  if (o.seed) j["seed"] = *o.seed;
  return j;
}

fs::path prepare_out(const Options& o) {
  const fs::path out(o.out);
  fs::create_directories(out);
  return out;
}

void write_effective(json eff, int ranks, const fs::path& out) {
  eff["ranks"] = ranks;
  config::write_json(eff, out / "effective_config.json");
}

int run_mhd_cmd(const Options& o, std::ostream& os) {
  const json j = read_config(o);
  const int ranks = config::ranks_from_json(j);
  const auto cfg = config::mhd_from_json(j, ranks);
  const auto out = prepare_out(o);
  write_effective(config::to_json(cfg), ranks, out);

  mhd::MhdRunOptions ro;
  if (cfg.output_every > 0)
    ro.on_output = [&](int step, const mhd::GlobalField& f) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "fields_step%06d", step);
      mhd::write_field_dump(f, cfg.grid, out / stem);
    };
  const auto r = mhd::run_mhd(cfg, ranks, ro);
  trace::write_trace(out / "trace.jsonl", r.timeline);
  mhd::write_conserved_csv(r.history, out / "conserved.csv");
  mhd::write_field_dump(r.state, cfg.grid, out / "fields");
  config::write_json({{"steps", r.timing.steps},
                      {"time", r.state.time},
                      {"ranks", ranks},
                      {"wall_seconds", r.timing.wall_seconds},
                      {"rank_cpu_seconds", r.timing.rank_cpu_seconds},
                      {"region_seconds", r.timing.region_seconds}},
                     out / "summary.json");
  os << "mhd: " << cfg.problem << " " << r.timing.steps << " steps to t=" << r.state.time
     << " on " << ranks << " ranks in " << r.timing.wall_seconds << " s\n";
  return kOk;
}

int run_pic_cmd(const Options& o, std::ostream& os) {
  const json j = read_config(o);
  const int ranks = config::ranks_from_json(j);
  const auto cfg = config::pic_from_json(j, ranks);
  const auto out = prepare_out(o);
  write_effective(config::to_json(cfg), ranks, out);

  const auto r = pic::run_pic(cfg, ranks, cfg.cycles);
  trace::write_trace(out / "trace.jsonl", r.timeline);
  pic::write_energy_csv(r.history, out / "energy.csv");
  pic::write_kernel_csv(r.timing.kernels, out / "kernels.csv");
  const auto& last = r.history.back();
  config::write_json({{"cycles", cfg.cycles},
                      {"ranks", ranks},
                      {"migrated", r.migrated},
                      {"field_energy", last.field},
                      {"kinetic_energy", last.kinetic},
                      {"wall_seconds", r.timing.wall_seconds},
                      {"rank_cpu_seconds", r.timing.rank_cpu_seconds}},
                     out / "summary.json");
  os << "pic: " << cfg.cycles << " cycles on " << ranks << " ranks, energy "
     << r.history.front().total() << " -> " << last.total() << "\n";
  return kOk;
}

int run_gravity_cmd(const Options& o, std::ostream& os) {
  const json j = read_config(o);
  const int ranks = config::ranks_from_json(j);
  const auto cfg = config::gravity_from_json(j, ranks);
  const auto out = prepare_out(o);
  write_effective(config::to_json(cfg), ranks, out);

  const auto r = gravity::run_gravity(cfg, ranks);
  trace::write_trace(out / "trace.jsonl", r.timeline);
  gravity::write_snapshot(r.bodies, out / "bodies");
  json summary{{"bodies", std::uint64_t(r.bodies.size())},
               {"ranks", ranks},
               {"walk", gravity::to_string(cfg.walk)},
               {"interactions", r.interactions},
               {"wall_seconds", r.timing.wall_seconds},
               {"rank_cpu_seconds", r.timing.rank_cpu_seconds}};
  if (cfg.check_direct) {
    gravity::write_force_csv(r.bodies, r.accel, r.direct, out / "forces.csv");
    auto e = r.rel_error;
    std::nth_element(e.begin(), e.begin() + std::ptrdiff_t(e.size() / 2), e.end());
    summary["median_rel_error"] = e[e.size() / 2];
    summary["max_rel_error"] = *std::max_element(r.rel_error.begin(), r.rel_error.end());
  }
  config::write_json(summary, out / "summary.json");
  os << "gravity: " << r.bodies.size() << " bodies, " << r.interactions
     << " interactions on " << ranks << " ranks\n";
  return kOk;
}

int run_trace_analyze(const Options& o, std::ostream& os) {
  trace::TraceTimeline tl;
  try {
    tl = trace::load_trace(o.in);
  } catch (const IoFailure& e) {
    throw UsageError(e.what());
  }
  trace::PopOptions po;
  po.region = o.region;
  po.ideal_replay = o.ideal_replay;
  const auto report = trace::compute_pop_metrics(tl, po);
  json j = trace::to_json(report);
  j["latency_findings"] = json::array();
  for (const auto& f : trace::detect_latency_antipattern(tl))
    j["latency_findings"].push_back(trace::to_json(f));

  if (o.format == "csv") {
    os << trace::to_csv(report);
  } else {
    os << j.dump(2) << "\n";
  }
  if (!o.out.empty() && o.out != "-") {
    const auto out = prepare_out(o);
    config::write_json(j, out / "efficiency.json");
    std::ofstream(out / "efficiency.csv") << trace::to_csv(report);
  }
  return kOk;
}

int run_campaign_cmd(const Options& o, std::ostream& os) {
  const auto spec = bench::campaign_from_json(read_config(o));
  bench::MachineProfile machine = bench::MachineProfile::detect();
  if (o.machine) {
    try {
      machine = bench::machine_from_json(config::load_json(*o.machine));
    } catch (const IoFailure& e) {
      throw UsageError(e.what());
    }
  }
  const auto out = prepare_out(o);
  config::write_json(bench::to_json(spec), out / "effective_config.json");
  config::write_json(bench::to_json(machine), out / "machine.json");

  bench::CampaignOptions co;
  co.trace_dir = out / "traces";
  if (o.verbosity > 0)
    co.on_record = [&](const bench::TimingRecord& r) {
      os << "  ranks=" << r.rank_count << " resolution=" << r.resolution
         << " walltime=" << r.walltime << " s\n";
    };
  const auto result = bench::run_campaign(spec, machine, co);
  bench::emit_report(result, out, bench::format_from_string(o.format));

  os << "campaign " << spec.name << " (" << bench::to_string(spec.app) << ", "
     << bench::to_string(spec.mode) << ", clock " << result.clock << ")\n";
  for (std::size_t i = 0; i < result.records.size(); ++i)
    os << "  ranks " << result.records[i].rank_count << ": " << result.records[i].walltime
       << " s, speedup " << bench::round_to(result.speedups[i]) << ", efficiency "
       << bench::round_to(result.efficiencies[i]) << "\n";

  if (!o.baseline_dir) return kOk;
  fs::path store(*o.baseline_dir);
  if (spec.baseline_ref) store /= *spec.baseline_ref;
  const auto rep = bench::regression_check(result, store, o.tolerance, o.update_baselines);
  config::write_json(bench::to_json(rep), out / "regression.json");
  for (const auto& e : rep.entries)
    if (e.status != bench::RegressionStatus::Pass)
      os << "  " << bench::to_string(e.status) << ": ranks " << e.rank_count << " "
         << e.resolution << (e.status == bench::RegressionStatus::Fail
                                 ? " delta " + std::to_string(e.delta_pct) + "%"
                                 : "")
         << "\n";
  os << "regression check " << (rep.passed() ? "passed" : "FAILED") << " at "
     << o.tolerance << "% tolerance\n";
  return rep.passed() ? kOk : kCheckFailed;
}

int run_report_cmd(const Options& o, std::ostream& os) {
  bench::CampaignResult r;
  try {
    r = bench::load_result(o.in);
  } catch (const IoFailure& e) {
    throw UsageError(e.what());
  }
  const auto files = bench::emit_report(r, prepare_out(o), bench::format_from_string(o.format));
  for (const auto& f : files) os << f.string() << "\n";
  return kOk;
}

std::string schema_help(const std::string& sub) {
  json d;
  if (sub == "mhd") d = config::to_json(mhd::MhdConfig{});
  else if (sub == "pic") d = config::to_json(pic::PicConfig{});
  else if (sub == "gravity") d = config::to_json(gravity::GravityConfig{});
  else if (sub == "campaign") d = bench::to_json(bench::CampaignSpec{});
  else return {};
  if (sub != "campaign") d["ranks"] = 1;
  return "schema for '" + sub + "' (fields and defaults):\n" + d.dump(2) + "\n";
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Desk-scale mini-apps, trace analysis and scaling campaigns.", "examini"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.failure_message(CLI::FailureMessage::help);

  auto add_common = [&](CLI::App* s, bool needs_config) {
    auto* c = s->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    if (needs_config) c->required();
    s->add_option("--out", o.out, "Output directory")->capture_default_str();
    s->add_option("--seed", o.seed, "Override the config seed");
    s->add_flag("-v,--verbose", o.verbosity, "More output");
  };

  auto* mhd = app.add_subcommand("mhd", "Run the finite-volume MHD solver");
  auto* pic = app.add_subcommand("pic", "Run the implicit-moment PIC code");
  auto* grav = app.add_subcommand("gravity", "Run the tree gravity / SPH code");
  for (auto* s : {mhd, pic, grav}) {
    add_common(s, true);
    s->add_option("--ranks", o.ranks, "Override the rank count")->check(CLI::PositiveNumber);
  }

  auto* tr = app.add_subcommand("trace", "Trace tools");
  tr->require_subcommand(1, 1);
  auto* analyze = tr->add_subcommand("analyze", "POP efficiency metrics of a trace");
  analyze->add_option("--in", o.in, "Trace file (JSON lines)")->required()->check(CLI::ExistingFile);
  analyze->add_flag("--ideal-replay", o.ideal_replay, "Replay on an ideal network for SerE/TE");
  analyze->add_option("--region", o.region, "Restrict to one region");
  analyze->add_option("--out", o.out, "Also write efficiency.json/csv here");
  analyze->add_option("--format", o.format, "stdout format")
      ->check(CLI::IsMember({"json", "csv", "both"}));

  auto* camp = app.add_subcommand("campaign", "Run a scaling campaign");
  add_common(camp, true);
  camp->add_option("--machine", o.machine, "Machine profile JSON")->check(CLI::ExistingFile);
  camp->add_option("--baseline-dir", o.baseline_dir, "Baseline store for regression checks");
  camp->add_flag("--update-baselines", o.update_baselines, "Write measured times as baselines");
  camp->add_option("--tolerance", o.tolerance, "Regression tolerance in percent")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  camp->add_option("--format", o.format, "Report format")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();

  auto* rep = app.add_subcommand("report", "Re-emit a campaign result as CSV/JSON");
  rep->add_option("--in", o.in, "Campaign result JSON")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", o.out, "Output directory")->capture_default_str();
  rep->add_option("--format", o.format, "Report format")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();

  std::string sub;
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    sub = app.get_subcommands().front()->get_name();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (analyze->parsed() && analyze->count("--out") == 0) o.out.clear();
  try {
    if (sub == "mhd") return run_mhd_cmd(o, out);
    if (sub == "pic") return run_pic_cmd(o, out);
    if (sub == "gravity") return run_gravity_cmd(o, out);
    if (sub == "trace") return run_trace_analyze(o, out);
    if (sub == "campaign") return run_campaign_cmd(o, out);
    if (sub == "report") return run_report_cmd(o, out);
  } catch (const config::ValidationError& e) {
    err << "invalid configuration:\n";
    for (const auto& v : e.violations()) err << "  " << v << "\n";
    err << schema_help(sub);
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace examini::cli
