#include "examini/trace/trace.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <utility>

#include <json.hpp>

namespace examini::trace {

using nlohmann::json;

namespace {
constexpr std::array<std::pair<State, std::string_view>, 8> kStateNames{{
    {State::Useful, "USEFUL"},
    {State::Send, "SEND"},
    {State::Recv, "RECV"},
    {State::Wait, "WAIT"},
    {State::Collective, "COLLECTIVE"},
    {State::Barrier, "BARRIER"},
    {State::OmpRuntime, "OMP_RUNTIME"},
    {State::Idle, "IDLE"},
}};
}  // namespace

std::string_view to_string(State s) {
  for (auto [st, name] : kStateNames)
    if (st == s) return name;
  return "UNKNOWN";
}

State state_from_string(std::string_view s) {
  for (auto [st, name] : kStateNames)
    if (name == s) return st;
  throw MalformedEvent("unknown state '" + std::string(s) + "'");
}

// TraceTimeline ----------------------------------------------------------------

TraceTimeline::TraceTimeline(std::vector<int> threads_per_rank, Nanos roi_start,
                             Nanos roi_end)
    : threads_per_rank_(std::move(threads_per_rank)),
      roi_start_(roi_start),
      roi_end_(roi_end) {
  offsets_.reserve(threads_per_rank_.size());
  std::size_t total = 0;
  for (int t : threads_per_rank_) {
    if (t < 1) throw MalformedEvent("every rank needs at least one thread");
    offsets_.push_back(total);
    total += static_cast<std::size_t>(t);
  }
  streams_.resize(total);
  if (roi_end_ < roi_start_) throw MalformedEvent("RoI end precedes RoI start");
}

void TraceTimeline::set_roi(Nanos t0, Nanos t1) {
  if (t1 < t0) throw MalformedEvent("RoI end precedes RoI start");
  roi_start_ = t0;
  roi_end_ = t1;
}

std::size_t TraceTimeline::stream_index(int rank, int thread) const {
  if (rank < 0 || rank >= ranks() || thread < 0 ||
      thread >= threads_per_rank_[rank])
    throw MalformedEvent("event (rank " + std::to_string(rank) + ", thread " +
                         std::to_string(thread) + ") outside the trace shape");
  return offsets_[rank] + static_cast<std::size_t>(thread);
}

void TraceTimeline::add(TraceEvent e) {
  streams_[stream_index(e.rank, e.thread)].push_back(std::move(e));
}

std::size_t TraceTimeline::event_count() const {
  return std::accumulate(
      streams_.begin(), streams_.end(), std::size_t{0},
      [](std::size_t n, const auto& s) { return n + s.size(); });
}

void TraceTimeline::validate() const {
  for (const auto& s : streams_) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& e = s[i];
      if (e.t_end < e.t_start)
        throw MalformedEvent("event ends before it starts (rank " +
                             std::to_string(e.rank) + ")");
      if (i > 0 && e.t_start < s[i - 1].t_end)
        throw OverlapViolation("overlapping events on rank " +
                               std::to_string(e.rank) + " thread " +
                               std::to_string(e.thread) + " at t=" +
                               std::to_string(e.t_start));
    }
  }
}

void TraceTimeline::clip_to_roi() {
  for (auto& s : streams_) {
    std::vector<TraceEvent> kept;
    kept.reserve(s.size());
    for (auto& e : s) {
      if (e.t_end < roi_start_ || e.t_start > roi_end_) continue;
      // Zero-length markers exactly on the boundary are kept.
      if (e.t_end == roi_start_ && e.t_start < roi_start_) continue;
      if (e.t_start == roi_end_ && e.t_end > roi_end_) continue;
      e.t_start = std::max(e.t_start, roi_start_);
      e.t_end = std::min(e.t_end, roi_end_);
      kept.push_back(std::move(e));
    }
    s = std::move(kept);
  }
}

// JSON-lines I/O -------------------------------------------------------------

namespace {

json event_to_json(const TraceEvent& e) {
  json j{{"rank", e.rank},
         {"thread", e.thread},
         {"state", to_string(e.state)},
         {"t0", e.t_start},
         {"t1", e.t_end}};
  if (e.peer) j["peer"] = *e.peer;
  if (e.bytes) j["bytes"] = *e.bytes;
  if (e.region) j["region"] = *e.region;
  if (e.instructions) j["instructions"] = *e.instructions;
  if (e.tag) j["tag"] = *e.tag;
  return j;
}

TraceEvent event_from_json(const json& j) {
  TraceEvent e;
  e.rank = j.at("rank").get<int>();
  e.thread = j.value("thread", 0);
  e.state = state_from_string(j.at("state").get<std::string>());
  e.t_start = j.at("t0").get<Nanos>();
  e.t_end = j.at("t1").get<Nanos>();
  if (j.contains("peer")) e.peer = j["peer"].get<int>();
  if (j.contains("bytes")) e.bytes = j["bytes"].get<std::int64_t>();
  if (j.contains("region")) e.region = j["region"].get<std::string>();
  if (j.contains("instructions"))
    e.instructions = j["instructions"].get<std::int64_t>();
  if (j.contains("tag")) e.tag = j["tag"].get<int>();
  return e;
}

}  // namespace

void write_trace(std::ostream& os, const TraceTimeline& tl) {
  json header{{"schema", kTraceSchema},
              {"ranks", tl.ranks()},
              {"threads", tl.threads_per_rank()},
              {"roi", {tl.roi_start(), tl.roi_end()}}};
  os << header.dump() << '\n';
  for (std::size_t i = 0; i < tl.stream_count(); ++i)
    for (const auto& e : tl.stream(i)) os << event_to_json(e).dump() << '\n';
}

void write_trace(const std::filesystem::path& path, const TraceTimeline& tl) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path.string() + " for writing");
  write_trace(os, tl);
  if (!os) throw IoFailure("write failed: " + path.string());
}

TraceTimeline read_trace(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<TraceTimeline> tl;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw MalformedEvent("line " + std::to_string(lineno) + ": " + ex.what());
    }
    try {
      if (!tl) {
        if (!j.contains("schema"))
          throw MalformedEvent("line " + std::to_string(lineno) +
                               ": missing header line");
        if (j["schema"].get<std::string>() != kTraceSchema)
          throw MalformedEvent("unsupported schema " +
                               j["schema"].get<std::string>());
        const int ranks = j.at("ranks").get<int>();
        if (ranks < 1) throw EmptyTrace("trace declares no ranks");
        std::vector<int> threads(static_cast<std::size_t>(ranks), 1);
        if (j.contains("threads"))
          threads = j["threads"].get<std::vector<int>>();
        if (static_cast<int>(threads.size()) != ranks)
          throw MalformedEvent("threads list length differs from ranks");
        const auto roi = j.at("roi").get<std::array<Nanos, 2>>();
        tl.emplace(std::move(threads), roi[0], roi[1]);
        continue;
      }
      TraceEvent e = event_from_json(j);
      if (e.t_end < e.t_start)
        throw MalformedEvent("line " + std::to_string(lineno) +
                             ": t1 precedes t0");
      tl->add(std::move(e));
    } catch (const json::exception& ex) {
      throw MalformedEvent("line " + std::to_string(lineno) + ": " + ex.what());
    } catch (const MalformedEvent& ex) {
      if (std::string(ex.what()).find("line ") != std::string::npos) throw;
      throw MalformedEvent("line " + std::to_string(lineno) + ": " +
                           ex.what());
    }
  }
  if (!tl) throw EmptyTrace("no header and no events");
  for (std::size_t i = 0; i < tl->stream_count(); ++i) {
    auto& s = tl->stream(i);
    std::stable_sort(s.begin(), s.end(), [](const auto& a, const auto& b) {
      return a.t_start < b.t_start ||
             (a.t_start == b.t_start && a.t_end < b.t_end);
    });
  }
  tl->validate();
  tl->clip_to_roi();
  return std::move(*tl);
}

TraceTimeline load_trace(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open " + path.string());
  return read_trace(is);
}

// Recorder -------------------------------------------------------------------

void Recorder::record(State state, Nanos t0, Nanos t1, std::optional<int> peer,
                      std::optional<std::int64_t> bytes,
                      std::optional<int> tag) {
  TraceEvent e;
  e.rank = rank_;
  e.thread = thread_;
  e.state = state;
  e.t_start = t0;
  e.t_end = t1;
  e.peer = peer;
  e.bytes = bytes;
  e.region = region_;
  e.tag = tag;
  events_.push_back(std::move(e));
}

void Recorder::shift(Nanos dt) {
  for (auto& e : events_) {
    e.t_start += dt;
    e.t_end += dt;
  }
}

TraceTimeline merge_recorders(std::vector<Recorder> recorders, Nanos t0,
                              Nanos t1) {
  int ranks = 0;
  for (const auto& r : recorders) ranks = std::max(ranks, r.rank() + 1);
  std::vector<int> threads(static_cast<std::size_t>(ranks), 1);
  for (const auto& r : recorders)
    threads[r.rank()] = std::max(threads[r.rank()], r.thread() + 1);
  TraceTimeline tl(std::move(threads), t0, t1);
  for (auto& r : recorders)
    for (auto& e : r.take()) tl.add(std::move(e));
  tl.validate();
  return tl;
}

}  // namespace examini::trace
