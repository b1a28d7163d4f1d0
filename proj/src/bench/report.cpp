#include "examini/bench/report.hpp"

#include <fstream>
#include <iomanip>

#include "examini/bench/metrics.hpp"
#include "examini/config/config.hpp"

namespace examini::bench {

ReportFormat format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  if (s == "both") return ReportFormat::Both;
  throw InvalidArgument("unknown report format '" + s + "'");
}

std::vector<std::filesystem::path> emit_report(const CampaignResult& r,
                                               const std::filesystem::path& dir,
                                               ReportFormat format) {
  if (r.records.empty()) throw InvalidArgument("cannot report an empty result");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::filesystem::path> out;

  if (format != ReportFormat::Json) {
    const auto path = dir / (r.name + ".csv");
    std::ofstream os(path);
    if (!os) throw IoFailure("cannot write " + path.string());
    os << "group,ranks,resolution,walltime,speedup,efficiency,ideal\n";
    int group = -1;
    for (std::size_t i = 0; i < r.records.size(); ++i) {
      const auto& rec = r.records[i];
      if (r.mode == Mode::GroupedStrong && rec.group != group) {
        group = rec.group;
        for (const auto& g : r.groups)
          if (g.group == group)
            os << "# group " << g.group << ", base ranks " << g.base_ranks
               << ", base resolution " << g.base_resolution << "\n";
      }
      os << rec.group << ',' << rec.rank_count << ',' << rec.resolution << ','
         << std::setprecision(9) << rec.walltime << ',' << std::fixed << std::setprecision(2)
         << round_to(r.speedups[i]) << ',' << round_to(r.efficiencies[i]) << ','
         << round_to(r.ideal[i]) << "\n"
         << std::defaultfloat;
    }
    if (!os) throw IoFailure("write failed for " + path.string());
    out.push_back(path);
  }
  if (format != ReportFormat::Csv) {
    const auto path = dir / (r.name + ".json");
    config::write_json(to_json(r), path);
    out.push_back(path);
  }
  return out;
}

CampaignResult load_result(const std::filesystem::path& path) {
  return result_from_json(config::load_json(path));
}

}  // namespace examini::bench
