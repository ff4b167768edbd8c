#include "omps/field_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace omps {

DivergedError::DivergedError(std::size_t index, double tau)
    : std::runtime_error("simulation diverged at index " + std::to_string(index) +
                         " (tau = " + std::to_string(tau) + ")"),
      index_(index),
      tau_(tau) {}

LinearPropagator::LinearPropagator(const Grid1D& grid, double detuning)
    : fft_(grid.n), k2_(grid.n), detuning_(detuning), multiplier_(grid.n) {
  for (int i = 0; i < grid.n; ++i) k2_[i] = grid.k[i] * grid.k[i];
}

void LinearPropagator::apply(std::span<cplx> field, double h) const {
  const int n = fft_.size();
  if (!(h == cached_h_)) {
    const double scale = 1.0 / n;
    for (int i = 0; i < n; ++i)
      multiplier_[i] = scale * std::exp(h * cplx(-1.0, detuning_ - k2_[i]));
    cached_h_ = h;
  }
  fft_.forward(field);
  for (int i = 0; i < n; ++i) field[i] *= multiplier_[i];
  fft_.backward_unscaled(field);
}

void nonlinear_step(std::span<cplx> field, std::span<const double> Z, std::span<const cplx> E,
                    double dt) {
  cplx rot, gain;
  for (std::size_t i = 0; i < field.size(); ++i) {
    nonlinear_factors(Z[i], dt, rot, gain);
    field[i] = rot * field[i] + gain * E[i];
  }
}

Simulator::Simulator(const NormalizedParams& params, Grid1D grid, PumpSchedule schedule,
                     double dt)
    : params_(params),
      grid_(std::move(grid)),
      schedule_(std::move(schedule)),
      dt_(dt),
      field_(grid_.n),
      pump_(grid_.n),
      linear_(grid_, params.detuning) {
  params_.validate();
  schedule_.validate();
  if (!(dt > 0.0)) throw std::domain_error("time step must be positive");
  if (dt > max_time_step(params.omega) * (1.0 + 1e-12))
    throw std::domain_error("time step " + std::to_string(dt) + " exceeds the limit 0.1/Omega = " +
                            std::to_string(max_time_step(params.omega)));
}

void Simulator::set_field(std::span<const cplx> f) {
  if (static_cast<int>(f.size()) != grid_.n) throw std::invalid_argument("field length mismatch");
  std::copy(f.begin(), f.end(), field_.begin());
}

std::vector<double> Simulator::intensity() const {
  std::vector<double> out(field_.size());
  for (std::size_t i = 0; i < field_.size(); ++i) out[i] = std::norm(field_[i]);
  return out;
}

void Simulator::set_schedule(PumpSchedule s) {
  s.validate();
  schedule_ = std::move(s);
  pump_dirty_ = true;
}

void Simulator::set_base_pump(const BasePump& base) {
  PumpSchedule s = schedule_;
  s.base = base;
  set_schedule(std::move(s));
}

void Simulator::add_beam(AddressBeam beam) {
  for (const auto& b : schedule_.beams)
    if (b.id == beam.id) throw std::invalid_argument("duplicate beam id '" + beam.id + "'");
  PumpSchedule s = schedule_;
  s.beams.push_back(std::move(beam));
  set_schedule(std::move(s));
}

bool Simulator::remove_beam(const std::string& id) {
  auto it = std::find_if(schedule_.beams.begin(), schedule_.beams.end(),
                         [&](const AddressBeam& b) { return b.id == id; });
  if (it == schedule_.beams.end()) return false;
  schedule_.beams.erase(it);
  pump_dirty_ = true;
  return true;
}

std::vector<cplx> Simulator::current_pump() const { return build_pump(schedule_, grid_, tau()); }

void Simulator::refresh_pump() {
  const double t = tau();
  bool changed = pump_dirty_ || active_.size() != schedule_.beams.size();
  active_.resize(schedule_.beams.size());
  for (std::size_t b = 0; b < schedule_.beams.size(); ++b) {
    const char on = schedule_.beams[b].active(t) ? 1 : 0;
    if (on != active_[b]) changed = true;
    active_[b] = on;
  }
  if (!changed) return;
  build_pump(schedule_, grid_, t, pump_);
  pump_dirty_ = false;
}

void Simulator::check_finite(std::span<const double> extra) const {
  for (std::size_t i = 0; i < field_.size(); ++i)
    if (!std::isfinite(field_[i].real()) || !std::isfinite(field_[i].imag()))
      throw DivergedError(i, tau());
  for (std::size_t i = 0; i < extra.size(); ++i)
    if (!std::isfinite(extra[i])) throw DivergedError(field_.size() + i, tau());
}

void Simulator::initialize_field(std::uint64_t seed, double noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < grid_.n; ++i) {
    const double e = std::abs(schedule_.base.at(grid_.x[i]));
    const auto roots = hss_intensities(params_.detuning, e * e);
    const auto hss = hss_field(roots.front(), params_.detuning, e);
    const double re = normal(rng);
    const double im = normal(rng);
    field_[i] = hss.field + noise * cplx(re, im);
  }
  steps_ = 0;
  tau0_ = 0.0;
  pump_dirty_ = true;
}

LatticeSimulator::LatticeSimulator(const NormalizedParams& params, PumpSchedule schedule,
                                   double dt)
    : Simulator(params, Grid1D::uniform(params.grid_points(), params.halfwidth),
                std::move(schedule), dt),
      weights_(quadrature_weights(params.points_per_mirror)),
      lattice_(params.mirrors),
      flow_(params.mirrors, params.rigidity, params.omega, params.mirror_size(), params.gamma,
            dt),
      scratch_intensity_(grid_.n),
      drive_(params.mirrors),
      rot_(params.mirrors),
      gain_(params.mirrors) {}

void LatticeSimulator::nonlinear_half(double h) {
  const int m = params_.points_per_mirror;
  for (int j = 0; j < params_.mirrors; ++j) nonlinear_factors(lattice_.z[j], h, rot_[j], gain_[j]);
  for (int j = 0; j < params_.mirrors; ++j) {
    const std::size_t base = static_cast<std::size_t>(j) * m;
    for (int l = 0; l < m; ++l) {
      const std::size_t i = base + l;
      field_[i] = rot_[j] * field_[i] + gain_[j] * pump_[i];
    }
  }
}

void LatticeSimulator::step() {
  refresh_pump();
  const double half = 0.5 * dt_;
  linear_.apply(field_, half);
  nonlinear_half(half);
  for (int i = 0; i < grid_.n; ++i) scratch_intensity_[i] = std::norm(field_[i]);
  radiation_drive(scratch_intensity_, weights_, params_.omega, drive_);
  flow_.advance(lattice_, drive_);
  nonlinear_half(half);
  linear_.apply(field_, half);
  advance_clock();
  check_finite(lattice_.z);
}

std::vector<double> LatticeSimulator::displacement_field() const {
  return expand_to_grid(lattice_.z, params_.points_per_mirror);
}

Snapshot LatticeSimulator::snapshot() const {
  Snapshot s;
  s.tau = tau();
  s.mirrors = static_cast<std::uint32_t>(params_.mirrors);
  s.points_per_mirror = static_cast<std::uint32_t>(params_.points_per_mirror);
  s.x = grid_.x;
  s.field = field_;
  s.Z = displacement_field();
  s.z = lattice_.z;
  s.v = lattice_.v;
  return s;
}

void LatticeSimulator::initialize(std::uint64_t seed, double noise) {
  initialize_field(seed, noise);
  lattice_ = LatticeState(params_.mirrors);
}

void LatticeSimulator::set_uniform(cplx field, double displacement) {
  std::fill(field_.begin(), field_.end(), field);
  lattice_ = LatticeState(params_.mirrors);
  std::fill(lattice_.z.begin(), lattice_.z.end(), displacement);
  steps_ = 0;
  tau0_ = 0.0;
  pump_dirty_ = true;
}

void LatticeSimulator::set_lattice(LatticeState s) {
  if (s.size() != params_.mirrors || s.v.size() != s.z.size())
    throw std::invalid_argument("lattice state size mismatch");
  lattice_ = std::move(s);
}

namespace {

double sup_change(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

SimulationResult simulate(Simulator& sim, const SimulateOptions& opts) {
  if (!(opts.tau_end > sim.tau())) throw std::domain_error("tau_end must exceed the current time");
  if (!(opts.snapshot_interval > 0.0)) throw std::domain_error("snapshot interval must be positive");

  SimulationResult result;
  const auto per_snapshot =
      std::max<std::int64_t>(1, std::llround(opts.snapshot_interval / sim.dt()));
  const std::int64_t total = std::llround((opts.tau_end - sim.tau()) / sim.dt());
  const double interval = static_cast<double>(per_snapshot) * sim.dt();

  auto emit = [&](Snapshot s) {
    if (opts.on_snapshot) opts.on_snapshot(s);
    if (opts.keep_snapshots) result.snapshots.push_back(std::move(s));
  };

  std::vector<double> prev_i = sim.intensity();
  std::vector<double> prev_z = sim.displacement_field();
  emit(sim.snapshot());

  int calm = 0;
  std::int64_t done = 0;
  while (done < total) {
    const std::int64_t chunk = std::min(per_snapshot, total - done);
    for (std::int64_t s = 0; s < chunk; ++s) sim.step();
    done += chunk;

    auto cur_i = sim.intensity();
    auto cur_z = sim.displacement_field();
    const double rate =
        std::max(sup_change(cur_i, prev_i), sup_change(cur_z, prev_z)) /
        (static_cast<double>(chunk) * sim.dt());
    result.last_change_rate = rate;
    if (chunk == per_snapshot) {
      if (rate < opts.steady.tol) {
        if (calm == 0) result.steady_since = sim.tau() - interval;
        ++calm;
      } else {
        calm = 0;
      }
    }
    result.steady = calm >= opts.steady.consecutive;
    prev_i = std::move(cur_i);
    prev_z = std::move(cur_z);
    emit(sim.snapshot());
    if (result.steady && opts.stop_when_steady) break;
  }
  result.final_state = sim.snapshot();
  return result;
}

}  // namespace omps
