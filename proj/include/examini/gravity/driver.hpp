#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "examini/gravity/force.hpp"
#include "examini/gravity/sph.hpp"
#include "examini/trace/trace.hpp"

namespace examini::gravity {

enum class Walk { Classic, Grouped };
std::string to_string(Walk w);
Walk walk_from_string(const std::string& s);

struct GravityConfig {
  std::size_t bodies = 4096;
  std::string distribution = "plummer";  // plummer | uniform
  std::uint64_t seed = 1;
  double active_fraction = 1.0;
  int leaf_capacity = 8;
  Walk walk = Walk::Grouped;
  WalkParams params{0.5, 1e-3, 32, 0.0};
  bool sph = false;
  SphParams sph_params;
  int steps = 1;            // force evaluations
  bool check_direct = false;  // also evaluate direct_sum and relative errors

  void validate(int ranks) const;
};

/// Deterministic initial conditions: unit total mass, Plummer sphere
/// (scale radius 1, truncated at 10) or the unit cube; ids 0..n-1.
std::vector<Body> make_bodies(const GravityConfig& cfg);

struct GravityTiming {
  double wall_seconds = 0.0;
  double rank_cpu_seconds = 0.0;
  std::map<std::string, double> region_seconds;
};

struct GravityResult {
  std::vector<Body> bodies;  // Hilbert order
  Accels accel;
  Accels direct;               // empty unless check_direct
  std::vector<double> rel_error;
  std::vector<double> hsml, density;  // empty unless sph
  std::uint64_t interactions = 0;
  trace::TraceTimeline timeline;
  GravityTiming timing;
};

/// Each rank builds the tree over all bodies and walks a contiguous
/// Hilbert range of them; rank 0 assembles the result.
GravityResult run_gravity(const GravityConfig& cfg, int ranks, int workers = 0,
                          bool record_traces = true);

/// Binary snapshot (per body: id, pos[3], vel[3], mass, active as float64)
/// plus a JSON header `<stem>.json`.
void write_snapshot(std::span<const Body> bodies, const std::filesystem::path& stem);
std::vector<Body> read_snapshot(const std::filesystem::path& stem);

/// CSV with columns id, a_tree, a_direct, rel_error.
void write_force_csv(std::span<const Body> bodies, const Accels& tree, const Accels& direct,
                     const std::filesystem::path& path);

}  // namespace examini::gravity
