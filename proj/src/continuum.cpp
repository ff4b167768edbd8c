#include "omps/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace omps {

ContinuumSimulator::ContinuumSimulator(const NormalizedParams& params, int n_points,
                                       PumpSchedule schedule, double dt)
    : Simulator(params, Grid1D::uniform(n_points, params.halfwidth), std::move(schedule), dt),
      Z_(n_points, 0.0),
      W_(n_points, 0.0),
      fft_(n_points),
      zs_(n_points),
      ws_(n_points),
      rs_(n_points) {
  flows_.reserve(n_points);
  for (int i = 0; i < n_points; ++i) flows_.emplace_back(mode_stiffness(grid_.k[i]), params_.gamma, dt);
}

double ContinuumSimulator::mode_stiffness(double k) const {
  const double rk = params_.rigidity * k;
  return params_.omega * params_.omega * (1.0 + rk * rk);
}

void ContinuumSimulator::nonlinear_half(double h) {
  cplx rot, gain;
  for (int i = 0; i < grid_.n; ++i) {
    nonlinear_factors(Z_[i], h, rot, gain);
    field_[i] = rot * field_[i] + gain * pump_[i];
  }
}

void ContinuumSimulator::mechanics() {
  const int n = grid_.n;
  const double om2 = params_.omega * params_.omega;
  for (int i = 0; i < n; ++i) {
    zs_[i] = Z_[i];
    ws_[i] = W_[i];
    rs_[i] = om2 * std::norm(field_[i]);
  }
  fft_.forward(zs_);
  fft_.forward(ws_);
  fft_.forward(rs_);
  for (int i = 0; i < n; ++i) {
    double zr = zs_[i].real(), zi = zs_[i].imag();
    double wr = ws_[i].real(), wi = ws_[i].imag();
    flows_[i].advance(zr, wr, rs_[i].real());
    flows_[i].advance(zi, wi, rs_[i].imag());
    zs_[i] = {zr, zi};
    ws_[i] = {wr, wi};
  }
  fft_.backward(zs_);
  fft_.backward(ws_);
  for (int i = 0; i < n; ++i) {
    Z_[i] = zs_[i].real();
    W_[i] = ws_[i].real();
  }
}

void ContinuumSimulator::step() {
  refresh_pump();
  const double half = 0.5 * dt_;
  linear_.apply(field_, half);
  nonlinear_half(half);
  mechanics();
  nonlinear_half(half);
  linear_.apply(field_, half);
  advance_clock();
  check_finite(Z_);
}

Snapshot ContinuumSimulator::snapshot() const {
  Snapshot s;
  s.tau = tau();
  s.mirrors = static_cast<std::uint32_t>(grid_.n);
  s.points_per_mirror = 1;
  s.x = grid_.x;
  s.field = field_;
  s.Z = Z_;
  s.z = Z_;
  s.v = W_;
  return s;
}

void ContinuumSimulator::initialize(std::uint64_t seed, double noise) {
  initialize_field(seed, noise);
  std::fill(Z_.begin(), Z_.end(), 0.0);
  std::fill(W_.begin(), W_.end(), 0.0);
}

void ContinuumSimulator::set_uniform(cplx field, double displacement) {
  std::fill(field_.begin(), field_.end(), field);
  std::fill(Z_.begin(), Z_.end(), displacement);
  std::fill(W_.begin(), W_.end(), 0.0);
  steps_ = 0;
  tau0_ = 0.0;
  pump_dirty_ = true;
}

void ContinuumSimulator::set_mechanics(std::span<const double> Z, std::span<const double> W) {
  if (static_cast<int>(Z.size()) != grid_.n || W.size() != Z.size())
    throw std::invalid_argument("mechanical field length mismatch");
  std::copy(Z.begin(), Z.end(), Z_.begin());
  std::copy(W.begin(), W.end(), W_.begin());
}

std::vector<double> interval_means(const Grid1D& grid, std::span<const double> values,
                                   std::span<const double> edges) {
  const int n = grid.n;
  std::vector<cplx> spec(values.begin(), values.end());
  Fft(n).forward(spec);
  const double x0 = grid.x[0];
  std::vector<double> out;
  if (edges.size() < 2) return out;
  out.resize(edges.size() - 1);
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e] - x0;
    const double b = edges[e + 1] - x0;
    cplx acc = spec[0] * (b - a);
    for (int i = 1; i < n; ++i) {
      const double k = grid.k[i];
      if (n % 2 == 0 && i == n / 2) {
        acc += spec[i] * (std::sin(k * b) - std::sin(k * a)) / k;
        continue;
      }
      acc += spec[i] * (std::polar(1.0, k * b) - std::polar(1.0, k * a)) / cplx(0.0, k);
    }
    out[e] = acc.real() / (n * (b - a));
  }
  return out;
}

ConvergenceRow compare_to_continuum(const Snapshot& lattice, const Snapshot& continuum,
                                    double halfwidth) {
  ConvergenceRow row;
  row.mirrors = static_cast<int>(lattice.mirrors);
  row.mirror_size = 2.0 * halfwidth / lattice.mirrors;

  const Grid1D ref = Grid1D::uniform(static_cast<int>(continuum.n_points()), halfwidth);
  const auto ref_i = continuum.intensity();
  const auto on_lattice = fourier_interpolate(ref, ref_i, lattice.x);
  const auto lat_i = lattice.intensity();
  const double dx = 2.0 * halfwidth / lattice.n_points();
  double si = 0.0;
  for (std::size_t i = 0; i < lat_i.size(); ++i) {
    const double d = lat_i[i] - on_lattice[i];
    si += d * d;
  }
  row.intensity_distance = std::sqrt(si * dx);

  std::vector<double> edges(lattice.mirrors + 1);
  for (std::size_t j = 0; j < edges.size(); ++j) edges[j] = -halfwidth + j * row.mirror_size;
  const auto means = interval_means(ref, continuum.Z, edges);
  double sz = 0.0;
  for (std::size_t j = 0; j < means.size(); ++j) {
    const double d = lattice.z[j] - means[j];
    sz += d * d;
  }
  row.displacement_distance = std::sqrt(sz * row.mirror_size);
  row.distance = std::hypot(row.intensity_distance, row.displacement_distance);
  return row;
}

ConvergenceTable discrete_vs_continuum(const NormalizedParams& base,
                                       const PumpSchedule& schedule,
                                       const std::vector<int>& mirror_counts,
                                       const ConvergenceOptions& opts) {
  ConvergenceTable table;
  SimulateOptions sim_opts;
  sim_opts.tau_end = opts.tau_end;
  sim_opts.steady = opts.steady;
  sim_opts.keep_snapshots = false;
  sim_opts.stop_when_steady = opts.stop_when_steady;

  ContinuumSimulator cont(base, opts.continuum_points, schedule, opts.dt);
  cont.initialize(opts.seed, opts.noise);
  auto ref = simulate(cont, sim_opts);
  table.reference = std::move(ref.final_state);
  table.reference_steady = ref.steady;

  for (int n : mirror_counts) {
    NormalizedParams p = base;
    p.mirrors = n;
    ConvergenceRow row;
    try {
      LatticeSimulator lat(p, schedule, opts.dt);
      lat.initialize(opts.seed, opts.noise);
      auto res = simulate(lat, sim_opts);
      row = compare_to_continuum(res.final_state, table.reference, base.halfwidth);
      row.steady = res.steady;
      row.state = std::move(res.final_state);
    } catch (const DivergedError& e) {
      row.mirrors = n;
      row.mirror_size = 2.0 * base.halfwidth / n;
      row.diverged = true;
      row.distance = row.intensity_distance = row.displacement_distance =
          std::numeric_limits<double>::quiet_NaN();
      row.message = e.what();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace omps
