#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "omps/grid.hpp"
#include "omps/lattice.hpp"
#include "omps/model.hpp"
#include "omps/pump.hpp"
#include "omps/snapshot.hpp"

namespace omps {

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kDefaultNoise = 1e-3;

// Largest admissible time step for a given mechanical frequency.
inline double max_time_step(double omega) { return 0.1 / omega; }

// Raised when the state stops being finite.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(std::size_t index, double tau);
  std::size_t index() const { return index_; }
  double tau() const { return tau_; }

 private:
  std::size_t index_;
  double tau_;
};

// Exact flow of dF/dtau = (-1 + i detuning + i d^2/dx^2) F, applied spectrally.
class LinearPropagator {
 public:
  LinearPropagator(const Grid1D& grid, double detuning);
  void apply(std::span<cplx> field, double h) const;

 private:
  Fft fft_;
  std::vector<double> k2_;
  double detuning_;
  mutable double cached_h_ = std::numeric_limits<double>::quiet_NaN();
  mutable std::vector<cplx> multiplier_;
};

// Rotation and gain of the exact flow of dF/dtau = i Z F + E over h, so that
// F(h) = rot * F(0) + gain * E. Uses the Z -> 0 limit gain = h below 1e-8.
inline void nonlinear_factors(double Z, double h, cplx& rot, cplx& gain) {
  rot = std::polar(1.0, Z * h);
  if (std::abs(Z) < 1e-8)
    gain = h;
  else
    gain = (rot - 1.0) / cplx(0.0, Z);
}

// Pointwise exact solution of dF/dtau = i Z F + E with Z and E frozen.
void nonlinear_step(std::span<cplx> field, std::span<const double> Z, std::span<const cplx> E,
                    double dt);

struct SteadyCheck {
  double tol = 1e-8;  // sup-norm change of (|F|^2, Z) per unit tau
  int consecutive = 10;
};

// Common driver state of the lattice and continuum solvers: field, pump
// schedule, clock. One instance is owned by a single writer.
class Simulator {
 public:
  virtual ~Simulator() = default;

  // One split step of length dt().
  virtual void step() = 0;
  // Displacement field Z on the field grid.
  virtual std::vector<double> displacement_field() const = 0;
  virtual Snapshot snapshot() const = 0;
  // HSS of the lowest branch under the local base pump plus complex white
  // noise of the given amplitude; mechanics at rest.
  virtual void initialize(std::uint64_t seed, double noise = kDefaultNoise) = 0;
  // Uniform field and displacement, mechanics at rest.
  virtual void set_uniform(cplx field, double displacement) = 0;

  const NormalizedParams& params() const { return params_; }
  const Grid1D& grid() const { return grid_; }
  double dt() const { return dt_; }
  double tau() const { return tau0_ + static_cast<double>(steps_) * dt_; }
  std::int64_t steps() const { return steps_; }
  std::span<const cplx> field() const { return field_; }
  void set_field(std::span<const cplx> f);
  std::vector<double> intensity() const;

  const PumpSchedule& schedule() const { return schedule_; }
  void set_schedule(PumpSchedule s);
  void set_base_pump(const BasePump& base);
  // Adds a beam to the schedule; ids must be unique.
  void add_beam(AddressBeam beam);
  // Returns false when no beam has that id.
  bool remove_beam(const std::string& id);
  std::vector<cplx> current_pump() const;

 protected:
  Simulator(const NormalizedParams& params, Grid1D grid, PumpSchedule schedule, double dt);

  // Rebuilds the cached pump if the active beam set changed since last call.
  void refresh_pump();
  void check_finite(std::span<const double> extra) const;
  void initialize_field(std::uint64_t seed, double noise);
  void advance_clock() { ++steps_; }

  NormalizedParams params_;
  Grid1D grid_;
  PumpSchedule schedule_;
  double dt_;
  double tau0_ = 0.0;
  std::int64_t steps_ = 0;
  std::vector<cplx> field_;
  std::vector<cplx> pump_;
  std::vector<char> active_;
  bool pump_dirty_ = true;
  LinearPropagator linear_;
};

// Field on N*M points coupled to N micromirrors.
//
// One step is the symmetric composition
//   L(dt/2) NL(dt/2; Z_n) Mech(dt; |F|^2) NL(dt/2; Z_{n+1}) L(dt/2)
// where L is the spectral linear flow, NL the exact nonlinear/pump flow with
// frozen displacement and Mech the exact flow of the coupled chain with the
// radiation drive frozen at the midpoint intensity.
class LatticeSimulator final : public Simulator {
 public:
  LatticeSimulator(const NormalizedParams& params, PumpSchedule schedule,
                   double dt = kDefaultStep);

  void step() override;
  std::vector<double> displacement_field() const override;
  Snapshot snapshot() const override;
  void initialize(std::uint64_t seed, double noise = kDefaultNoise) override;
  void set_uniform(cplx field, double displacement) override;

  const LatticeState& lattice() const { return lattice_; }
  void set_lattice(LatticeState s);
  const QuadratureWeights& weights() const { return weights_; }

 private:
  void nonlinear_half(double h);

  QuadratureWeights weights_;
  LatticeState lattice_;
  CoupledLatticeFlow flow_;
  std::vector<double> scratch_intensity_;
  std::vector<double> drive_;
  std::vector<cplx> rot_, gain_;
};

struct SimulateOptions {
  double tau_end = 100.0;
  double snapshot_interval = 1.0;
  SteadyCheck steady;
  bool stop_when_steady = false;
  bool keep_snapshots = true;
  std::function<void(const Snapshot&)> on_snapshot;
};

struct SimulationResult {
  std::vector<Snapshot> snapshots;
  Snapshot final_state;
  bool steady = false;
  double steady_since = 0.0;
  double last_change_rate = 0.0;
};

// Repeated steps up to tau_end with a snapshot every snapshot_interval.
// The steady flag is set once the change rate stays below the tolerance for
// `steady.consecutive` checks in a row. DivergedError propagates.
SimulationResult simulate(Simulator& sim, const SimulateOptions& opts);

}  // namespace omps
