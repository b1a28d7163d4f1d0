#pragma once

// Constructed traces shared by the unit and acceptance suites.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "examini/trace/trace.hpp"

namespace examini::testing {

using trace::Nanos;
using trace::State;
using trace::TraceEvent;
using trace::TraceTimeline;

inline TraceEvent ev(int rank, State s, Nanos t0, Nanos t1,
                     std::optional<int> peer = {},
                     std::optional<std::int64_t> bytes = {}) {
  TraceEvent e;
  e.rank = rank;
  e.state = s;
  e.t_start = t0;
  e.t_end = t1;
  e.peer = peer;
  e.bytes = bytes;
  return e;
}

/// r0: USEFUL 8 + collective 2; r1: USEFUL 6 + collective 4; T = 10.
inline TraceTimeline two_rank_imbalance() {
  TraceTimeline tl({1, 1}, 0, 10);
  tl.add(ev(0, State::Useful, 0, 8));
  tl.add(ev(0, State::Collective, 8, 10));
  tl.add(ev(1, State::Useful, 0, 6));
  tl.add(ev(1, State::Collective, 6, 10));
  return tl;
}

/// r0: USEFUL[0,4], SEND[4,5]->r1; r1: WAIT[0,5]<-r0, USEFUL[5,9]; T = 9.
inline TraceTimeline two_rank_send_wait() {
  TraceTimeline tl({1, 1}, 0, 9);
  tl.add(ev(0, State::Useful, 0, 4));
  tl.add(ev(0, State::Send, 4, 5, 1, 8));
  tl.add(ev(1, State::Wait, 0, 5, 0, 8));
  tl.add(ev(1, State::Useful, 5, 9));
  return tl;
}

/// BARRIER, `n` small SENDs with no gap (one optionally replaced by a large
/// message), BARRIER.
inline TraceTimeline barrier_bounded_sends(int n, int large_at = -1) {
  TraceTimeline tl({1, 1}, 0, 1000);
  Nanos t = 0;
  tl.add(ev(0, State::Barrier, t, t + 5));
  t += 5;
  for (int i = 0; i < n; ++i) {
    const std::int64_t bytes = i == large_at ? (1 << 20) : 8;
    tl.add(ev(0, State::Send, t, t + 3, 1, bytes));
    t += 3;
  }
  tl.add(ev(0, State::Barrier, t, t + 5));
  t += 5;
  tl.add(ev(0, State::Useful, t, 1000));
  // Rank 1 receives every message after the second barrier.
  tl.add(ev(1, State::Barrier, 0, 5));
  tl.add(ev(1, State::Useful, 5, 7));
  tl.add(ev(1, State::Barrier, 7, t));
  Nanos u = t;
  for (int i = 0; i < n; ++i) {
    const std::int64_t bytes = i == large_at ? (1 << 20) : 8;
    tl.add(ev(1, State::Recv, u, u + 2, 0, bytes));
    u += 2;
  }
  tl.add(ev(1, State::Useful, u, 1000));
  return tl;
}

/// Causally consistent random trace: phases of compute, random point-to-point
/// messages with latency, and collectives, simulated on per-rank clocks.
inline TraceTimeline random_trace(std::mt19937_64& rng, int ranks,
                                  int phases) {
  std::uniform_int_distribution<Nanos> work(1, 1000);
  std::uniform_int_distribution<Nanos> lat(0, 50);
  std::uniform_int_distribution<int> pick(0, ranks - 1);
  std::bernoulli_distribution coin(0.5);
  std::vector<Nanos> clock(static_cast<std::size_t>(ranks), 0);
  std::vector<TraceEvent> events;
  std::string region;
  auto push = [&](int r, State s, Nanos t0, Nanos t1,
                  std::optional<int> peer = {},
                  std::optional<std::int64_t> bytes = {}) {
    auto e = ev(r, s, t0, t1, peer, bytes);
    e.region = region;
    events.push_back(e);
    clock[r] = t1;
  };
  for (int p = 0; p < phases; ++p) {
    region = p % 2 ? "A" : "B";
    for (int r = 0; r < ranks; ++r) {
      const Nanos gap = coin(rng) ? lat(rng) : 0;  // untraced time
      const Nanos t0 = clock[r] + gap;
      push(r, State::Useful, t0, t0 + work(rng));
    }
    const int msgs = ranks > 1 ? pick(rng) + 1 : 0;
    for (int m = 0; m < msgs; ++m) {
      const int a = pick(rng);
      int b = pick(rng);
      if (a == b) b = (b + 1) % ranks;
      const Nanos send_start = clock[a];
      push(a, State::Send, send_start, send_start + lat(rng), b, 64);
      const Nanos arrival = send_start + lat(rng);
      const Nanos r0 = clock[b];
      push(b, coin(rng) ? State::Wait : State::Recv, r0,
           std::max(r0, arrival) + lat(rng) % 3, a, 64);
    }
    if (coin(rng)) {
      Nanos latest = 0;
      for (int r = 0; r < ranks; ++r) latest = std::max(latest, clock[r]);
      const Nanos done = latest + lat(rng);
      for (int r = 0; r < ranks; ++r)
        push(r, p % 3 == 0 ? State::Barrier : State::Collective, clock[r],
             done + lat(rng) % 5);
    }
  }
  Nanos end = 0;
  for (Nanos c : clock) end = std::max(end, c);
  TraceTimeline tl(std::vector<int>(static_cast<std::size_t>(ranks), 1), 0,
                   end + lat(rng));
  for (auto& e : events) tl.add(std::move(e));
  tl.validate();
  return tl;
}

}  // namespace examini::testing
