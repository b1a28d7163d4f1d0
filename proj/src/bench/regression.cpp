#include "examini/bench/regression.hpp"

#include <cstdio>
#include <fstream>

#include "examini/config/config.hpp"

namespace examini::bench {

namespace {

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json baseline_json(const CampaignResult& r, const TimingRecord& rec) {
  return {{"app", to_string(r.app)},
          {"mode", to_string(r.mode)},
          {"rank_count", rec.rank_count},
          {"resolution", rec.resolution},
          {"fingerprint", r.fingerprint},
          {"clock", r.clock},
          {"walltime", rec.walltime}};
}

}  // namespace

std::string to_string(RegressionStatus s) {
  switch (s) {
    case RegressionStatus::Pass: return "pass";
    case RegressionStatus::Fail: return "fail";
    case RegressionStatus::Missing: return "missing";
  }
  return "?";
}

bool RegressionReport::passed() const { return failures().empty(); }

std::vector<RegressionEntry> RegressionReport::failures() const {
  std::vector<RegressionEntry> f;
  for (const auto& e : entries)
    if (e.status == RegressionStatus::Fail) f.push_back(e);
  return f;
}

std::filesystem::path baseline_path(const std::filesystem::path& store, const CampaignResult& r,
                                    const TimingRecord& rec) {
  return store / (to_string(r.app) + "_" + to_string(r.mode) + "_r" +
                  std::to_string(rec.rank_count) + "_" + rec.resolution + "_" +
                  fnv1a_hex(r.fingerprint) + ".json");
}

RegressionReport regression_check(const CampaignResult& result,
                                  const std::filesystem::path& store, double tolerance_pct,
                                  bool update) {
  if (!(tolerance_pct >= 0.0)) throw InvalidArgument("tolerance_pct must be >= 0");
  RegressionReport rep;
  rep.tolerance_pct = tolerance_pct;
  std::filesystem::create_directories(store);
  for (const auto& rec : result.records) {
    RegressionEntry e{rec.group, rec.rank_count, rec.resolution, 0.0, rec.walltime, 0.0,
                      RegressionStatus::Pass, {}};
    const auto path = baseline_path(store, result, rec);
    if (std::filesystem::exists(path)) {
      const json b = config::load_json(path);
      if (b.value("fingerprint", std::string()) != result.fingerprint)
        throw InvalidArgument(path.string() + " belongs to another host fingerprint");
      e.baseline = b.at("walltime").get<double>();
      e.delta_pct = 100.0 * (rec.walltime - e.baseline) / e.baseline;
      if (e.delta_pct > tolerance_pct) e.status = RegressionStatus::Fail;
    } else {
      e.status = RegressionStatus::Missing;
      const MissingBaseline info("no baseline for ranks=" + std::to_string(rec.rank_count) +
                                 " resolution=" + rec.resolution);
      e.note = info.what();
      if (!update) {
        auto cand = path;
        cand.replace_extension(".candidate.json");
        config::write_json(baseline_json(result, rec), cand);
        rep.written.push_back(cand);
      }
    }
    if (update) {
      config::write_json(baseline_json(result, rec), path);
      rep.written.push_back(path);
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

json to_json(const RegressionReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"group", e.group},
                       {"rank_count", e.rank_count},
                       {"resolution", e.resolution},
                       {"baseline", e.baseline},
                       {"measured", e.measured},
                       {"delta_pct", e.delta_pct},
                       {"status", to_string(e.status)},
                       {"note", e.note}});
  json written = json::array();
  for (const auto& p : r.written) written.push_back(p.string());
  return {{"tolerance_pct", r.tolerance_pct},
          {"passed", r.passed()},
          {"entries", entries},
          {"written", written}};
}

}  // namespace examini::bench
