#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "examini/core/error.hpp"
#include "examini/trace/trace.hpp"

namespace examini {

/// Monotonic nanoseconds since an arbitrary process-wide epoch.
std::int64_t wall_now_ns();
/// CPU time consumed by the calling thread.
std::int64_t thread_cpu_ns();

/// Worker count honouring EXAMINI_WORKERS, defaulting to the hardware
/// concurrency (at least 1).
int default_workers();

using Payload = std::vector<std::byte>;

template <typename T>
Payload pack(std::span<const T> values) {
  static_assert(std::is_trivially_copyable_v<T>);
  Payload p(values.size_bytes());
  if (!values.empty()) std::memcpy(p.data(), values.data(), p.size());
  return p;
}

template <typename T>
std::vector<T> unpack(const Payload& p) {
  static_assert(std::is_trivially_copyable_v<T>);
  if (p.size() % sizeof(T) != 0)
    throw InvalidArgument("payload size not a multiple of element size");
  std::vector<T> out(p.size() / sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), p.data(), p.size());
  return out;
}

class Communicator;

/// Shared state of an in-process rank world: one mailbox per
/// (source, destination, tag), matched in FIFO order.
class World {
 public:
  struct Options {
    int ranks = 1;
    int workers = 0;  // 0: default_workers()
    std::chrono::milliseconds watchdog{120000};
    bool record_traces = true;
  };

  explicit World(Options opts);
  ~World();
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  int size() const { return opts_.ranks; }
  int workers() const { return workers_; }
  const Options& options() const { return opts_; }

  /// Runs `body` once per rank on its own thread, at most `workers` of
  /// them computing at any instant. The first exception (by rank order)
  /// is rethrown after all ranks finish.
  void run(const std::function<void(Communicator&)>& body);

  /// Traces of the last `run`, RoI spanning the whole run.
  const trace::TraceTimeline& timeline() const { return timeline_; }

 private:
  friend class Communicator;
  struct Key {
    int src;
    int dst;
    int tag;
    auto operator<=>(const Key&) const = default;
  };

  void post(Key key, Payload payload);
  Payload take(Key key);
  void abort_all();

  Options opts_;
  int workers_;
  std::counting_semaphore<1 << 20> slots_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<Key, std::deque<Payload>> boxes_;
  bool aborted_ = false;
  trace::TraceTimeline timeline_;
};

/// Per-rank handle. Every interval between communication calls is recorded
/// as USEFUL under the active region label.
class Communicator {
 public:
  Communicator(World& world, int rank);

  int rank() const { return rank_; }
  int size() const { return world_.size(); }

  /// Eager, non-blocking send: the payload is copied into the peer mailbox.
  void send(int dst, int tag, Payload payload);
  /// Blocks until the matching message arrives; NeighborTimeout after the
  /// watchdog expires.
  Payload recv(int src, int tag);

  template <typename T>
  void send_values(int dst, int tag, std::span<const T> v) {
    send(dst, tag, pack(v));
  }
  template <typename T>
  std::vector<T> recv_values(int src, int tag) {
    return unpack<T>(recv(src, tag));
  }

  /// Reductions combine contributions in rank order on rank 0 and
  /// broadcast the result, so they are bitwise reproducible.
  double allreduce_min(double v);
  double allreduce_max(double v);
  double allreduce_sum(double v);
  std::vector<double> allreduce_sum(std::span<const double> v);
  /// Every rank receives every rank's contribution, indexed by rank.
  std::vector<Payload> allgather(Payload mine);
  void barrier();

  /// Switches the RoI region label; time so far is flushed as USEFUL.
  void set_region(std::optional<std::string> region);
  /// Flushes pending USEFUL time without changing the region.
  void mark();

  trace::Recorder& recorder() { return recorder_; }

 private:
  friend class World;
  std::vector<Payload> gather_all(Payload mine, trace::State state);
  void flush_useful(std::int64_t now);
  void record(trace::State s, std::int64_t t0, std::int64_t t1,
              std::optional<int> peer, std::optional<std::int64_t> bytes,
              std::optional<int> tag);
  void release_slot();
  void acquire_slot();

  World& world_;
  int rank_;
  trace::Recorder recorder_;
  std::int64_t last_mark_;
  int collective_seq_ = 0;
};

/// Cartesian rank layout helpers shared by the grid-based mini-apps.
struct RankLayout3 {
  int px = 1, py = 1, pz = 1;

  int size() const { return px * py * pz; }
  int rank_of(int ix, int iy, int iz) const;
  std::array<int, 3> coords_of(int rank) const;
  /// Rank at coords + offset with periodic wrap; nullopt when the offset
  /// leaves a non-periodic axis.
  std::optional<int> neighbor(int rank, std::array<int, 3> offset,
                              std::array<bool, 3> periodic) const;
};

/// Near-cubic factorisation of `ranks` into (px, py, pz) with px >= py >= pz.
RankLayout3 factor_ranks(int ranks);

}  // namespace examini
