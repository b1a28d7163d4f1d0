#include "examini/core/comm.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <thread>

namespace examini {

std::int64_t wall_now_ns() {
  using namespace std::chrono;
  static const auto epoch = steady_clock::now();
  return duration_cast<nanoseconds>(steady_clock::now() - epoch).count();
}

std::int64_t thread_cpu_ns() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<std::int64_t>(ts.tv_sec) * 1000000000LL + ts.tv_nsec;
}

int default_workers() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("EXAMINI_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(std::min<long>(v, hw));
  }
  return hw;
}

// World ----------------------------------------------------------------------

World::World(Options opts)
    : opts_(opts),
      workers_(opts.workers > 0 ? opts.workers : default_workers()),
      slots_(workers_) {
  if (opts_.ranks < 1) throw InvalidArgument("rank count must be >= 1");
}

World::~World() = default;

void World::post(Key key, Payload payload) {
  {
    std::lock_guard lock(mu_);
    boxes_[key].push_back(std::move(payload));
  }
  cv_.notify_all();
}

Payload World::take(Key key) {
  std::unique_lock lock(mu_);
  auto ready = [&] {
    if (aborted_) return true;
    auto it = boxes_.find(key);
    return it != boxes_.end() && !it->second.empty();
  };
  if (!cv_.wait_for(lock, opts_.watchdog, ready)) {
    throw NeighborTimeout("rank " + std::to_string(key.dst) +
                          " timed out waiting for rank " +
                          std::to_string(key.src) + " (tag " +
                          std::to_string(key.tag) + ")");
  }
  if (aborted_) throw RankAborted("peer rank failed");
  auto& q = boxes_[key];
  Payload p = std::move(q.front());
  q.pop_front();
  return p;
}

void World::abort_all() {
  {
    std::lock_guard lock(mu_);
    aborted_ = true;
  }
  cv_.notify_all();
}

void World::run(const std::function<void(Communicator&)>& body) {
  {
    std::lock_guard lock(mu_);
    boxes_.clear();
    aborted_ = false;
  }
  const int n = opts_.ranks;
  std::vector<std::exception_ptr> errors(n);
  std::vector<trace::Recorder> recorders;
  recorders.reserve(n);
  for (int r = 0; r < n; ++r) recorders.emplace_back(r, 0);

  const std::int64_t t0 = wall_now_ns();
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (int r = 0; r < n; ++r) {
    threads.emplace_back([&, r] {
      slots_.acquire();
      Communicator comm(*this, r);
      try {
        body(comm);
        comm.mark();
      } catch (...) {
        errors[r] = std::current_exception();
        abort_all();
      }
      recorders[r] = std::move(comm.recorder_);
      slots_.release();
    });
  }
  for (auto& t : threads) t.join();
  const std::int64_t t1 = wall_now_ns();

  if (opts_.record_traces) {
    // Rebase to the run start so timelines start at zero.
    for (auto& rec : recorders) rec.shift(-t0);
    timeline_ = trace::merge_recorders(std::move(recorders), 0, t1 - t0);
  }

  // Prefer a root cause over the secondary RankAborted errors.
  std::exception_ptr first_abort;
  for (auto& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const RankAborted&) {
      if (!first_abort) first_abort = e;
    } catch (...) {
      std::rethrow_exception(e);
    }
  }
  if (first_abort) std::rethrow_exception(first_abort);
}

// Communicator ---------------------------------------------------------------

namespace {
constexpr int kCollectiveTagBase = 1 << 28;
}

Communicator::Communicator(World& world, int rank)
    : world_(world), rank_(rank), recorder_(rank, 0), last_mark_(wall_now_ns()) {}

void Communicator::record(trace::State s, std::int64_t t0, std::int64_t t1,
                          std::optional<int> peer,
                          std::optional<std::int64_t> bytes,
                          std::optional<int> tag) {
  if (!world_.opts_.record_traces) return;
  recorder_.record(s, t0, std::max(t0, t1), peer, bytes, tag);
}

void Communicator::flush_useful(std::int64_t now) {
  if (now > last_mark_) record(trace::State::Useful, last_mark_, now, {}, {}, {});
  last_mark_ = std::max(last_mark_, now);
}

void Communicator::mark() { flush_useful(wall_now_ns()); }

void Communicator::set_region(std::optional<std::string> region) {
  mark();
  recorder_.set_region(std::move(region));
}

void Communicator::release_slot() { world_.slots_.release(); }
void Communicator::acquire_slot() { world_.slots_.acquire(); }

void Communicator::send(int dst, int tag, Payload payload) {
  if (dst < 0 || dst >= size()) throw InvalidArgument("send: bad destination");
  const std::int64_t t0 = wall_now_ns();
  flush_useful(t0);
  const auto bytes = static_cast<std::int64_t>(payload.size());
  world_.post({rank_, dst, tag}, std::move(payload));
  const std::int64_t t1 = wall_now_ns();
  record(trace::State::Send, t0, t1, dst, bytes, tag);
  last_mark_ = std::max(last_mark_, t1);
}

Payload Communicator::recv(int src, int tag) {
  if (src < 0 || src >= size()) throw InvalidArgument("recv: bad source");
  const std::int64_t t0 = wall_now_ns();
  flush_useful(t0);
  release_slot();
  Payload p;
  try {
    p = world_.take({src, rank_, tag});
  } catch (...) {
    acquire_slot();
    throw;
  }
  acquire_slot();
  const std::int64_t t1 = wall_now_ns();
  record(trace::State::Wait, t0, t1, src, static_cast<std::int64_t>(p.size()),
         tag);
  last_mark_ = std::max(last_mark_, t1);
  return p;
}

std::vector<Payload> Communicator::gather_all(Payload mine, trace::State state) {
  const std::int64_t t0 = wall_now_ns();
  flush_useful(t0);
  const int tag = kCollectiveTagBase + collective_seq_++;
  const int n = size();
  std::vector<Payload> all(n);
  release_slot();
  try {
    if (rank_ == 0) {
      all[0] = std::move(mine);
      for (int r = 1; r < n; ++r) all[r] = world_.take({r, 0, tag});
      // Broadcast the concatenation with a size prefix per rank.
      Payload flat;
      for (const auto& p : all) {
        const std::uint64_t sz = p.size();
        const auto* b = reinterpret_cast<const std::byte*>(&sz);
        flat.insert(flat.end(), b, b + sizeof sz);
        flat.insert(flat.end(), p.begin(), p.end());
      }
      for (int r = 1; r < n; ++r) world_.post({0, r, tag}, flat);
    } else {
      world_.post({rank_, 0, tag}, std::move(mine));
      Payload flat = world_.take({0, rank_, tag});
      std::size_t off = 0;
      for (int r = 0; r < n; ++r) {
        std::uint64_t sz = 0;
        std::memcpy(&sz, flat.data() + off, sizeof sz);
        off += sizeof sz;
        all[r].assign(flat.begin() + static_cast<std::ptrdiff_t>(off),
                      flat.begin() + static_cast<std::ptrdiff_t>(off + sz));
        off += sz;
      }
    }
  } catch (...) {
    acquire_slot();
    throw;
  }
  acquire_slot();
  const std::int64_t t1 = wall_now_ns();
  std::int64_t bytes = 0;
  for (const auto& p : all) bytes += static_cast<std::int64_t>(p.size());
  record(state, t0, t1, {}, bytes, {});
  last_mark_ = std::max(last_mark_, t1);
  return all;
}

std::vector<Payload> Communicator::allgather(Payload mine) {
  return gather_all(std::move(mine), trace::State::Collective);
}

double Communicator::allreduce_min(double v) {
  double out = v;
  bool first = true;
  for (const auto& p : gather_all(pack(std::span<const double>(&v, 1)),
                                  trace::State::Collective)) {
    const double x = unpack<double>(p).at(0);
    out = first ? x : std::min(out, x);
    first = false;
  }
  return out;
}

double Communicator::allreduce_max(double v) {
  double out = v;
  bool first = true;
  for (const auto& p : gather_all(pack(std::span<const double>(&v, 1)),
                                  trace::State::Collective)) {
    const double x = unpack<double>(p).at(0);
    out = first ? x : std::max(out, x);
    first = false;
  }
  return out;
}

double Communicator::allreduce_sum(double v) {
  return allreduce_sum(std::span<const double>(&v, 1)).at(0);
}

std::vector<double> Communicator::allreduce_sum(std::span<const double> v) {
  std::vector<double> out(v.size(), 0.0);
  for (const auto& p : gather_all(pack(v), trace::State::Collective)) {
    const auto x = unpack<double>(p);
    if (x.size() != out.size())
      throw InvalidArgument("allreduce_sum: length mismatch across ranks");
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += x[i];
  }
  return out;
}

void Communicator::barrier() { gather_all({}, trace::State::Barrier); }

// Layout ---------------------------------------------------------------------

int RankLayout3::rank_of(int ix, int iy, int iz) const {
  return (iz * py + iy) * px + ix;
}

std::array<int, 3> RankLayout3::coords_of(int rank) const {
  return {rank % px, (rank / px) % py, rank / (px * py)};
}

std::optional<int> RankLayout3::neighbor(int rank, std::array<int, 3> offset,
                                         std::array<bool, 3> periodic) const {
  auto c = coords_of(rank);
  const std::array<int, 3> dims{px, py, pz};
  for (int d = 0; d < 3; ++d) {
    int v = c[d] + offset[d];
    if (v < 0 || v >= dims[d]) {
      if (!periodic[d]) return std::nullopt;
      v = ((v % dims[d]) + dims[d]) % dims[d];
    }
    c[d] = v;
  }
  return rank_of(c[0], c[1], c[2]);
}

RankLayout3 factor_ranks(int ranks) {
  if (ranks < 1) throw InvalidArgument("rank count must be >= 1");
  std::vector<int> primes;
  for (int n = ranks, p = 2; n > 1;) {
    if (n % p == 0) {
      primes.push_back(p);
      n /= p;
    } else {
      ++p;
    }
  }
  std::array<int, 3> dims{1, 1, 1};
  for (auto it = primes.rbegin(); it != primes.rend(); ++it) {
    *std::min_element(dims.begin(), dims.end()) *= *it;
  }
  std::sort(dims.begin(), dims.end(), std::greater<>());
  return {dims[0], dims[1], dims[2]};
}

}  // namespace examini
