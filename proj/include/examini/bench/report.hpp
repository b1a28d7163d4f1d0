#pragma once

#include <filesystem>
#include <vector>

#include "examini/bench/campaign.hpp"

namespace examini::bench {

enum class ReportFormat { Csv, Json, Both };
ReportFormat format_from_string(const std::string& s);

/// Writes `<dir>/<name>.csv` (one row per configuration with ranks,
/// walltime, speedup, efficiency and ideal speedup; grouped campaigns get a
/// "# group" line before each group) and/or `<dir>/<name>.json`.
/// Throws InvalidArgument on an empty result, IoFailure on write errors.
std::vector<std::filesystem::path> emit_report(const CampaignResult& r,
                                               const std::filesystem::path& dir,
                                               ReportFormat format = ReportFormat::Both);

CampaignResult load_result(const std::filesystem::path& path);

}  // namespace examini::bench
