#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "examini/core/error.hpp"

namespace examini::trace {

EXAMINI_DEFINE_ERROR(MalformedEvent);
EXAMINI_DEFINE_ERROR(OverlapViolation);
EXAMINI_DEFINE_ERROR(EmptyTrace);

/// Nanoseconds. All trace arithmetic is exact integer arithmetic.
using Nanos = std::int64_t;

enum class State {
  Useful,
  Send,
  Recv,
  Wait,
  Collective,
  Barrier,
  OmpRuntime,
  Idle,
};

std::string_view to_string(State s);
State state_from_string(std::string_view s);

/// Point-to-point states that complete a receive.
inline bool is_receive(State s) { return s == State::Recv || s == State::Wait; }
inline bool is_point_to_point(State s) {
  return s == State::Send || s == State::Recv || s == State::Wait;
}
inline bool is_sync(State s) {
  return s == State::Collective || s == State::Barrier;
}

struct TraceEvent {
  int rank = 0;
  int thread = 0;
  State state = State::Useful;
  Nanos t_start = 0;
  Nanos t_end = 0;
  std::optional<int> peer;
  std::optional<std::int64_t> bytes;
  std::optional<std::string> region;
  std::optional<std::int64_t> instructions;
  std::optional<int> tag;

  Nanos duration() const { return t_end - t_start; }
  bool operator==(const TraceEvent&) const = default;
};

/// Per-(rank, thread) ordered event streams plus the region-of-interest
/// window. Streams are addressed by `stream_index(rank, thread)`.
class TraceTimeline {
 public:
  TraceTimeline() = default;
  TraceTimeline(std::vector<int> threads_per_rank, Nanos roi_start,
                Nanos roi_end);

  int ranks() const { return static_cast<int>(threads_per_rank_.size()); }
  int threads(int rank) const { return threads_per_rank_.at(rank); }
  const std::vector<int>& threads_per_rank() const { return threads_per_rank_; }
  Nanos roi_start() const { return roi_start_; }
  Nanos roi_end() const { return roi_end_; }
  Nanos runtime() const { return roi_end_ - roi_start_; }
  void set_roi(Nanos t0, Nanos t1);

  std::size_t stream_count() const { return streams_.size(); }
  std::size_t stream_index(int rank, int thread) const;
  std::vector<TraceEvent>& stream(std::size_t i) { return streams_.at(i); }
  const std::vector<TraceEvent>& stream(std::size_t i) const {
    return streams_.at(i);
  }
  const std::vector<TraceEvent>& stream(int rank, int thread) const {
    return streams_.at(stream_index(rank, thread));
  }

  /// Appends to the owning stream; ordering is checked by `validate`.
  void add(TraceEvent e);
  std::size_t event_count() const;

  /// Checks t_end >= t_start, rank/thread bounds and per-stream ordering.
  /// Throws MalformedEvent / OverlapViolation.
  void validate() const;

  /// Clips events to the RoI window; events entirely outside are dropped.
  void clip_to_roi();

  bool operator==(const TraceTimeline&) const = default;

 private:
  std::vector<int> threads_per_rank_;
  std::vector<std::size_t> offsets_;
  Nanos roi_start_ = 0;
  Nanos roi_end_ = 0;
  std::vector<std::vector<TraceEvent>> streams_;
};

inline constexpr std::string_view kTraceSchema = "examini-trace/1";

/// JSON-lines: header line, then one event per line.
void write_trace(std::ostream& os, const TraceTimeline& tl);
void write_trace(const std::filesystem::path& path, const TraceTimeline& tl);
TraceTimeline read_trace(std::istream& is);
TraceTimeline load_trace(const std::filesystem::path& path);

/// Single-owner event recorder for one (rank, thread). Timestamps are taken
/// by the caller; the recorder only tracks the active region label.
class Recorder {
 public:
  Recorder(int rank, int thread) : rank_(rank), thread_(thread) {}

  void record(State state, Nanos t0, Nanos t1, std::optional<int> peer = {},
              std::optional<std::int64_t> bytes = {},
              std::optional<int> tag = {});

  void set_region(std::optional<std::string> region) {
    region_ = std::move(region);
  }
  const std::optional<std::string>& region() const { return region_; }

  int rank() const { return rank_; }
  int thread() const { return thread_; }
  const std::vector<TraceEvent>& events() const { return events_; }
  std::vector<TraceEvent> take() { return std::move(events_); }
  void shift(Nanos dt);

 private:
  int rank_;
  int thread_;
  std::optional<std::string> region_;
  std::vector<TraceEvent> events_;
};

/// Merges per-rank recorders (one thread each) into a timeline whose RoI
/// spans [t0, t1].
TraceTimeline merge_recorders(std::vector<Recorder> recorders, Nanos t0,
                              Nanos t1);

}  // namespace examini::trace
