#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "examini/bench/campaign.hpp"

namespace examini::bench {

/// Informative only: a configuration had no stored baseline. The check
/// records a candidate file next to where the baseline would live.
EXAMINI_DEFINE_ERROR(MissingBaseline);

enum class RegressionStatus { Pass, Fail, Missing };
std::string to_string(RegressionStatus s);

struct RegressionEntry {
  int group = 0;
  int rank_count = 1;
  std::string resolution;
  double baseline = 0.0;  // seconds; 0 when missing
  double measured = 0.0;
  double delta_pct = 0.0;  // 100 * (measured - baseline) / baseline
  RegressionStatus status = RegressionStatus::Pass;
  std::string note;
};

struct RegressionReport {
  double tolerance_pct = 10.0;
  std::vector<RegressionEntry> entries;
  std::vector<std::filesystem::path> written;  // baselines or candidates

  /// False iff some entry failed; missing baselines do not fail.
  bool passed() const;
  std::vector<RegressionEntry> failures() const;
};

/// Baseline file for one configuration of `r`, keyed by app, mode, rank
/// count, resolution and host fingerprint.
std::filesystem::path baseline_path(const std::filesystem::path& store, const CampaignResult& r,
                                    const TimingRecord& rec);

/// Compares median walltimes against the store. A configuration fails when
/// it is slower than its baseline by more than `tolerance_pct`. Baselines
/// are written only when `update` is set.
RegressionReport regression_check(const CampaignResult& result,
                                  const std::filesystem::path& store, double tolerance_pct,
                                  bool update = false);

json to_json(const RegressionReport& r);

}  // namespace examini::bench
