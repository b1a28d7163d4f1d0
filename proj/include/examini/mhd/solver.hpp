#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "examini/core/comm.hpp"
#include "examini/mhd/ct.hpp"
#include "examini/mhd/grid.hpp"
#include "examini/mhd/riemann.hpp"
#include "examini/mhd/state.hpp"
#include "examini/mhd/wenoz.hpp"

namespace examini::mhd {

enum class Reconstruction { WENOZ };
enum class TimeStepper { RK3 };
enum class DivBMode { CT, GLM };

std::string to_string(RiemannSolver s);
std::string to_string(DivBMode m);
RiemannSolver riemann_from_string(const std::string& s);
DivBMode divb_from_string(const std::string& s);

struct MhdConfig {
  std::string problem = "orszag_tang";  // orszag_tang | cp_alfven
  GridSpec grid{};
  double gamma = 5.0 / 3.0;
  double cfl = 0.3;
  double t_end = 1.0;
  int max_steps = 1000;
  Reconstruction reconstruction = Reconstruction::WENOZ;
  RiemannSolver riemann = RiemannSolver::HLLD;
  TimeStepper time_stepper = TimeStepper::RK3;
  DivBMode divb = DivBMode::CT;
  double glm_ch_ratio = 1.0;
  double glm_damping = 0.18;
  double amplitude = 0.1;                    // CP Alfven
  std::array<int, 3> wave_cycles{1, 1, 1};   // CP Alfven wavevector / 2pi
  double pressure_floor = 1e-12;
  bool strict_pressure = false;  // throw instead of flooring
  int output_every = 0;          // steps between field dumps, 0 = final only
  std::uint64_t seed = 1;

  /// Throws InvalidArgument on the first violation.
  void validate(int ranks) const;
};

/// One rank's share of the solution: conservative cell averages with
/// ghosts, plus the staggered field in CT mode.
struct MhdBlock {
  BlockGeometry geo;
  std::array<BlockField, NVAR> u;
  FaceB faces;
  double time = 0.0;

  MhdBlock() = default;
  explicit MhdBlock(const BlockGeometry& g);
  ConsState cell(std::ptrdiff_t c) const;
  void set_cell(std::ptrdiff_t c, const ConsState& v);
};

/// Sets interior cell-centred B to the average of the two bounding faces.
void cell_b_from_faces(MhdBlock& b);

struct MhdCounters {
  std::uint64_t pressure_floors = 0;
  std::uint64_t reconstruction_fallbacks = 0;
  RiemannStats riemann;
};

/// Global totals over interior cells.
struct MhdDiagnostics {
  double time = 0.0;
  double dt = 0.0;
  double mass = 0.0;
  std::array<double, 3> momentum{};
  double energy = 0.0;
  double divb_max = 0.0;  // max |div B| * min dx / max |B|
  double divb_l2 = 0.0;   // RMS of |div B| (raw units)
};

/// Finite-volume driver for one rank's block. Stage pipeline: Boundary,
/// ConsToPrim, Reconstruct, Riemann, RightHandSide (traced as regions
/// when a communicator is attached).
class MhdSolver {
 public:
  /// `comm` may be null for a single-rank periodic run.
  MhdSolver(const MhdConfig& cfg, MhdBlock block, Communicator* comm);

  const MhdConfig& config() const { return cfg_; }
  MhdBlock& block() { return b_; }
  const MhdBlock& block() const { return b_; }
  const MhdCounters& counters() const { return counters_; }

  /// Largest |v_a| + c_f,a over interior cells and axes (global).
  double max_signal_speed();
  /// CFL time step, clipped so the step does not pass t_end.
  double compute_dt();
  /// One SSP-RK3 step of size dt; in GLM mode followed by psi damping.
  /// Unphysical states are rethrown with the stage index.
  void rk3_step(double dt);
  /// Multiplies psi by exp(-dt * ch / (glm_damping * min dx)).
  void glm_damp(double dt, double ch);
  /// Pure GLM step: transport (with given ch) then damping.
  void glm_step(double dt, double ch);

  /// Fills ghost layers of the cell data (and faces in CT mode).
  void boundary();
  MhdDiagnostics diagnostics();

  /// Cell-centred divergence of the cell-centred field (GLM diagnostics).
  BlockField cell_divergence() const;

 private:
  void stage(int s, double dt, double ch);
  void region(const char* name);
  void cons_to_prim_all();
  void sweep(int d, double ch);
  void right_hand_side(int s, double dt);

  MhdConfig cfg_;
  MhdBlock b_;
  Communicator* comm_;
  MhdCounters counters_;
  std::array<double, 3> dx_{};
  // stage scratch
  MhdBlock u0_;
  std::array<BlockField, NVAR> w_;
  std::array<BlockField, NVAR> wl_, wr_;
  std::array<std::array<BlockField, NVAR>, 3> flux_;
  EdgeEmf emf_;
  double ch_ = 0.0;
};

}  // namespace examini::mhd
