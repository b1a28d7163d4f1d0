#include "examini/trace/pop.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <tuple>

namespace examini::trace {

using nlohmann::json;

// Ideal-network replay ---------------------------------------------------------

namespace {

struct MsgKey {
  int src, dst, tag;
  auto operator<=>(const MsgKey&) const = default;
};

struct SyncKey {
  State state;
  std::string region;
  int seq;
  auto operator<=>(const SyncKey&) const = default;
};

int tag_of(const TraceEvent& e) { return e.tag.value_or(-1); }

}  // namespace

ReplayResult ideal_network_replay(const TraceTimeline& tl) {
  const std::size_t ns = tl.stream_count();

  // Message matching: k-th send (src->dst, tag) pairs with the k-th receive.
  std::map<MsgKey, std::vector<std::optional<Nanos>>> sends;  // availability
  std::map<MsgKey, std::size_t> sends_total, recvs_total;
  // Receive ordinal per event and sync sequence per event.
  std::vector<std::vector<std::size_t>> ordinal(ns);
  std::map<SyncKey, std::vector<std::size_t>> sync_members;  // stream ids
  std::map<std::pair<State, std::string>, std::map<std::size_t, int>>
      sync_counts;
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& st = tl.stream(s);
    ordinal[s].assign(st.size(), 0);
    std::map<std::pair<State, std::string>, int> seq;
    for (std::size_t i = 0; i < st.size(); ++i) {
      const auto& e = st[i];
      if (e.state == State::Send) {
        if (!e.peer)
          throw UnmatchedMessage("SEND without peer on rank " +
                                 std::to_string(e.rank));
        MsgKey k{e.rank, *e.peer, tag_of(e)};
        ordinal[s][i] = sends_total[k]++;
      } else if (is_receive(e.state) && e.peer) {
        MsgKey k{*e.peer, e.rank, tag_of(e)};
        ordinal[s][i] = recvs_total[k]++;
      } else if (is_sync(e.state)) {
        auto key = std::make_pair(e.state, e.region.value_or(""));
        const int q = seq[key]++;
        ordinal[s][i] = static_cast<std::size_t>(q);
        sync_members[{e.state, key.second, q}].push_back(s);
        sync_counts[key][s] = q + 1;
      }
    }
  }
  for (const auto& [k, n] : recvs_total) {
    auto it = sends_total.find(k);
    const std::size_t have = it == sends_total.end() ? 0 : it->second;
    if (have < n)
      throw UnmatchedMessage("rank " + std::to_string(k.dst) +
                             " receives message " + std::to_string(have) +
                             " from rank " + std::to_string(k.src) +
                             " (tag " + std::to_string(k.tag) +
                             ") that was never sent");
  }
  for (const auto& [k, n] : sends_total) {
    auto it = recvs_total.find(k);
    const std::size_t have = it == recvs_total.end() ? 0 : it->second;
    if (have < n)
      throw UnmatchedMessage("rank " + std::to_string(k.src) + " sends " +
                             std::to_string(n - have) +
                             " unreceived message(s) to rank " +
                             std::to_string(k.dst));
    sends[k].assign(n, std::nullopt);
  }
  for (const auto& [key, counts] : sync_counts) {
    int expect = -1;
    for (auto [s, c] : counts) {
      if (expect < 0) expect = c;
      if (c != expect)
        throw UnmatchedMessage(std::string(to_string(key.first)) +
                               " count differs across participants (region '" +
                               key.second + "')");
    }
  }

  // Event-driven rescheduling.
  TraceTimeline out = tl;
  std::vector<std::size_t> cursor(ns, 0);
  std::vector<Nanos> clock(ns, tl.roi_start());
  std::vector<Nanos> prev_end(ns, tl.roi_start());
  std::map<SyncKey, std::map<std::size_t, Nanos>> arrivals;

  auto step = [&](std::size_t s) -> bool {
    const auto& st = tl.stream(s);
    if (cursor[s] >= st.size()) return false;
    const std::size_t i = cursor[s];
    const auto& e = st[i];
    const Nanos start = clock[s] + (e.t_start - prev_end[s]);
    Nanos end = start;
    switch (e.state) {
      case State::Send: {
        sends[{e.rank, *e.peer, tag_of(e)}][ordinal[s][i]] = start;
        end = start;
        break;
      }
      case State::Recv:
      case State::Wait: {
        if (!e.peer) {
          end = start;  // unattributed transfer time vanishes
          break;
        }
        const auto& avail = sends[{*e.peer, e.rank, tag_of(e)}][ordinal[s][i]];
        if (!avail) return false;
        end = std::max(start, *avail);
        break;
      }
      case State::Collective:
      case State::Barrier: {
        SyncKey key{e.state, e.region.value_or(""),
                    static_cast<int>(ordinal[s][i])};
        auto& arr = arrivals[key];
        arr.emplace(s, start);
        const auto& members = sync_members.at(key);
        if (arr.size() < members.size()) return false;
        Nanos done = start;
        for (auto [m, t] : arr) done = std::max(done, t);
        end = done;
        break;
      }
      default:
        end = start + e.duration();
        break;
    }
    auto& oe = out.stream(s)[i];
    oe.t_start = start;
    oe.t_end = end;
    clock[s] = end;
    prev_end[s] = e.t_end;
    ++cursor[s];
    return true;
  };

  for (;;) {
    bool progress = false;
    bool done = true;
    for (std::size_t s = 0; s < ns; ++s) {
      while (step(s)) progress = true;
      if (cursor[s] < tl.stream(s).size()) done = false;
    }
    if (done) break;
    if (!progress) {
      for (std::size_t s = 0; s < ns; ++s) {
        if (cursor[s] < tl.stream(s).size()) {
          const auto& e = tl.stream(s)[cursor[s]];
          throw UnmatchedMessage("replay deadlocked at rank " +
                                 std::to_string(e.rank) + " event " +
                                 std::to_string(cursor[s]) + " (" +
                                 std::string(to_string(e.state)) + ")");
        }
      }
    }
  }

  Nanos finish = tl.roi_start();
  for (std::size_t s = 0; s < ns; ++s)
    finish = std::max(finish, clock[s] + (tl.roi_end() - prev_end[s]));
  out.set_roi(tl.roi_start(), finish);
  return {finish - tl.roi_start(), std::move(out)};
}

// POP metrics ------------------------------------------------------------------

namespace {

bool in_region(const TraceEvent& e, const std::optional<std::string>& region) {
  return !region || (e.region && *e.region == *region);
}

std::vector<Nanos> useful_per_unit(const TraceTimeline& tl,
                                   const std::optional<std::string>& region) {
  std::vector<Nanos> u(tl.stream_count(), 0);
  for (std::size_t s = 0; s < tl.stream_count(); ++s)
    for (const auto& e : tl.stream(s))
      if (e.state == State::Useful && in_region(e, region))
        u[s] += e.duration();
  return u;
}

/// Elapsed time of a region: the longest per-unit total spent in it.
Nanos region_runtime(const TraceTimeline& tl, const std::string& region) {
  Nanos best = 0;
  for (std::size_t s = 0; s < tl.stream_count(); ++s) {
    Nanos t = 0;
    for (const auto& e : tl.stream(s))
      if (e.region && *e.region == region) t += e.duration();
    best = std::max(best, t);
  }
  return best;
}

double omp_efficiency(const TraceTimeline& tl,
                      const std::optional<std::string>& region) {
  double acc = 0.0;
  int counted = 0;
  for (int r = 0; r < tl.ranks(); ++r) {
    Nanos useful = 0, omp = 0;
    for (int t = 0; t < tl.threads(r); ++t) {
      for (const auto& e : tl.stream(r, t)) {
        if (!in_region(e, region)) continue;
        if (e.state == State::Useful) useful += e.duration();
        if (e.state == State::OmpRuntime) omp += e.duration();
      }
    }
    if (useful + omp == 0) continue;
    acc += static_cast<double>(useful) / static_cast<double>(useful + omp);
    ++counted;
  }
  return counted == 0 ? 1.0 : acc / counted;
}

Efficiencies metrics_for(const TraceTimeline& tl,
                         const std::optional<std::string>& region,
                         const ReplayResult* replay,
                         const TraceTimeline* base) {
  Efficiencies m;
  const auto useful = useful_per_unit(tl, region);
  Nanos umax = 0, usum = 0;
  for (Nanos u : useful) {
    umax = std::max(umax, u);
    usum += u;
  }
  const Nanos runtime = region ? region_runtime(tl, *region) : tl.runtime();
  m.runtime = runtime;
  m.useful_max = umax;
  m.useful_sum = usum;
  m.useful_mean = useful.empty() ? 0.0
                                 : static_cast<double>(usum) /
                                       static_cast<double>(useful.size());
  if (runtime <= 0)
    throw EmptyTrace(region ? "region '" + *region + "' has zero duration"
                            : std::string("RoI has zero duration"));
  const double T = static_cast<double>(runtime);
  m.load_balance = umax > 0 ? m.useful_mean / static_cast<double>(umax) : 1.0;
  m.communication_efficiency = static_cast<double>(umax) / T;
  m.parallel_efficiency = m.useful_mean / T;
  if (replay) {
    const Nanos ideal = region ? region_runtime(replay->timeline, *region)
                               : replay->runtime_ideal;
    m.runtime_ideal = ideal;
    if (ideal > 0) {
      m.serialization_efficiency =
          static_cast<double>(umax) / static_cast<double>(ideal);
      m.transfer_efficiency = static_cast<double>(ideal) / T;
    }
  }
  m.omp_communication_efficiency = omp_efficiency(tl, region);
  if (base) {
    const auto sc = compute_scalability(*base, tl, region);
    m.computation_scalability = sc.computation;
    m.instruction_scalability = sc.instruction;
    m.global_efficiency = m.parallel_efficiency * sc.computation;
  }
  return m;
}

}  // namespace

EfficiencyReport compute_pop_metrics(const TraceTimeline& tl,
                                     const PopOptions& opts) {
  if (tl.ranks() < 1 || tl.event_count() == 0)
    throw EmptyTrace("trace has no events in its RoI");
  std::optional<ReplayResult> replay;
  if (opts.ideal_replay) {
    try {
      replay = ideal_network_replay(tl);
    } catch (const UnmatchedMessage& ex) {
      throw MissingDependency(std::string("ideal replay impossible: ") +
                              ex.what());
    }
  }
  const ReplayResult* rp = replay ? &*replay : nullptr;

  EfficiencyReport report;
  report.global = metrics_for(tl, opts.region, rp, opts.base);
  std::set<std::string> labels;
  for (std::size_t s = 0; s < tl.stream_count(); ++s)
    for (const auto& e : tl.stream(s))
      if (e.region) labels.insert(*e.region);
  for (const auto& label : labels) {
    if (opts.region && label != *opts.region) continue;
    if (region_runtime(tl, label) == 0) continue;
    report.regions[label] = metrics_for(tl, label, rp, opts.base);
  }
  return report;
}

// Scalability ------------------------------------------------------------------

namespace {
std::optional<std::int64_t> total_instructions(
    const TraceTimeline& tl, const std::optional<std::string>& region) {
  std::int64_t total = 0;
  bool any = false;
  for (std::size_t s = 0; s < tl.stream_count(); ++s)
    for (const auto& e : tl.stream(s))
      if (e.instructions && in_region(e, region)) {
        total += *e.instructions;
        any = true;
      }
  if (!any) return std::nullopt;
  return total;
}

Nanos total_useful(const TraceTimeline& tl,
                   const std::optional<std::string>& region) {
  Nanos t = 0;
  for (Nanos u : useful_per_unit(tl, region)) t += u;
  return t;
}
}  // namespace

Scalability compute_scalability(const TraceTimeline& base,
                                const TraceTimeline& scaled,
                                const std::optional<std::string>& region) {
  Scalability out;
  const Nanos ub = total_useful(base, region);
  const Nanos us = total_useful(scaled, region);
  if (us <= 0) throw EmptyTrace("scaled trace has no useful time");
  out.computation = static_cast<double>(ub) / static_cast<double>(us);
  const auto ib = total_instructions(base, region);
  const auto is = total_instructions(scaled, region);
  if (ib && is && *is > 0)
    out.instruction = static_cast<double>(*ib) / static_cast<double>(*is);
  return out;
}

double instruction_scalability(const TraceTimeline& base,
                               const TraceTimeline& scaled) {
  const auto ib = total_instructions(base, std::nullopt);
  const auto is = total_instructions(scaled, std::nullopt);
  if (!ib || !is || *is == 0)
    throw MissingCounters("instruction counters absent from trace");
  return static_cast<double>(*ib) / static_cast<double>(*is);
}

// Latency antipattern ------------------------------------------------------

std::vector<LatencyFinding> detect_latency_antipattern(
    const TraceTimeline& tl, const AntipatternParams& params) {
  struct Run {
    std::size_t length = 0;
    Nanos latency = 0;
    Nanos t0 = 0, t1 = 0;
    std::set<int> ranks;
  };
  // (thread, segment, ordinal) -> merged finding
  std::map<std::tuple<int, int, int>, LatencyFinding> merged;

  for (int r = 0; r < tl.ranks(); ++r) {
    for (int th = 0; th < tl.threads(r); ++th) {
      const auto& st = tl.stream(r, th);
      int segment = -1;  // -1: before the first barrier
      std::vector<Run> pending;
      Run cur;
      Nanos gap = 0;
      Nanos last_end = tl.roi_start();

      auto close_run = [&] {
        if (cur.length >= params.min_run) pending.push_back(cur);
        cur = Run{};
        gap = 0;
      };

      for (const auto& e : st) {
        gap += std::max<Nanos>(0, e.t_start - last_end);
        last_end = e.t_end;
        if (e.state == State::Barrier) {
          close_run();
          if (segment >= 0) {
            int ordinal = 0;
            for (const auto& run : pending) {
              auto& f = merged[{th, segment, ordinal++}];
              f.thread = th;
              f.segment = segment;
              f.ordinal = ordinal - 1;
              f.run_length = std::max(f.run_length, run.length);
              f.accumulated_latency += run.latency;
              if (f.ranks.empty() || run.t0 < f.t_start) f.t_start = run.t0;
              f.t_end = std::max(f.t_end, run.t1);
              f.ranks.insert(run.ranks.begin(), run.ranks.end());
            }
          }
          pending.clear();
          ++segment;
          continue;
        }
        if (segment < 0) continue;
        const bool small = is_point_to_point(e.state) && e.bytes &&
                           *e.bytes <= params.max_bytes;
        if (small) {
          if (cur.length > 0 && gap > params.max_gap) close_run();
          if (cur.length == 0) {
            cur.t0 = e.t_start;
            cur.ranks.insert(r);
          }
          ++cur.length;
          cur.latency += e.duration();
          cur.t1 = e.t_end;
          if (e.peer) cur.ranks.insert(*e.peer);
          gap = 0;
        } else if (is_point_to_point(e.state) || is_sync(e.state)) {
          close_run();
        } else {
          gap += e.duration();
        }
      }
    }
  }
  std::vector<LatencyFinding> out;
  out.reserve(merged.size());
  for (auto& [k, f] : merged) out.push_back(std::move(f));
  return out;
}

// Serialisation -------------------------------------------------------------

json to_json(const Efficiencies& e) {
  json j{{"load_balance", e.load_balance},
         {"communication_efficiency", e.communication_efficiency},
         {"parallel_efficiency", e.parallel_efficiency},
         {"omp_communication_efficiency", e.omp_communication_efficiency},
         {"runtime_ns", e.runtime},
         {"useful_max_ns", e.useful_max},
         {"useful_mean_ns", e.useful_mean},
         {"useful_sum_ns", e.useful_sum}};
  if (e.serialization_efficiency)
    j["serialization_efficiency"] = *e.serialization_efficiency;
  if (e.transfer_efficiency) j["transfer_efficiency"] = *e.transfer_efficiency;
  if (e.runtime_ideal) j["runtime_ideal_ns"] = *e.runtime_ideal;
  if (e.computation_scalability)
    j["computation_scalability"] = *e.computation_scalability;
  if (e.instruction_scalability)
    j["instruction_scalability"] = *e.instruction_scalability;
  if (e.global_efficiency) j["global_efficiency"] = *e.global_efficiency;
  return j;
}

json to_json(const EfficiencyReport& r) {
  json regions = json::object();
  for (const auto& [name, m] : r.regions) regions[name] = to_json(m);
  return {{"global", to_json(r.global)}, {"regions", regions}};
}

json to_json(const LatencyFinding& f) {
  return {{"thread", f.thread},
          {"segment", f.segment},
          {"ordinal", f.ordinal},
          {"run_length", f.run_length},
          {"accumulated_latency_ns", f.accumulated_latency},
          {"t_start", f.t_start},
          {"t_end", f.t_end},
          {"ranks", std::vector<int>(f.ranks.begin(), f.ranks.end())}};
}

std::string to_csv(const EfficiencyReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "region,metric,value\n";
  auto emit = [&](const std::string& region, const Efficiencies& e) {
    auto row = [&](const char* name, std::optional<double> v) {
      if (v) os << region << ',' << name << ',' << *v << '\n';
    };
    row("LB", e.load_balance);
    row("CommE", e.communication_efficiency);
    row("SerE", e.serialization_efficiency);
    row("TE", e.transfer_efficiency);
    row("PE", e.parallel_efficiency);
    row("OCE", e.omp_communication_efficiency);
    row("CompS", e.computation_scalability);
    row("InstrS", e.instruction_scalability);
    row("GE", e.global_efficiency);
  };
  emit("ALL", r.global);
  for (const auto& [name, m] : r.regions) emit(name, m);
  return os.str();
}

}  // namespace examini::trace
