#include "omps/roundtrip.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "omps/field_solver.hpp"
#include "omps/lattice.hpp"

namespace omps {

void RoundtripParams::validate(std::size_t n) const {
  if (!(transmissivity >= 0.0) || !(transmissivity < 1.0))
    throw std::domain_error("transmissivity must lie in [0, 1)");
  if (!mirror_phase.empty() && mirror_phase.size() != n)
    throw std::invalid_argument("mirror phase length mismatch");
  if (!injection.empty() && injection.size() != n)
    throw std::invalid_argument("injection length mismatch");
}

RoundtripMap::RoundtripMap(Grid1D grid) : grid_(std::move(grid)), fft_(grid_.n) {}

void RoundtripMap::apply_inplace(std::span<cplx> A, const RoundtripParams& p) const {
  const int n = grid_.n;
  if (static_cast<int>(A.size()) != n) throw std::invalid_argument("field length mismatch");
  p.validate(A.size());

  if (!p.mirror_phase.empty())
    for (int i = 0; i < n; ++i) A[i] *= std::polar(1.0, 2.0 * p.mirror_phase[i]);

  const double amp = std::sqrt(p.reflectivity());
  if (p.diffraction != 0.0) {
    fft_.forward(A);
    for (int i = 0; i < n; ++i) {
      const double k = grid_.k[i];
      A[i] *= std::polar(amp / n, p.phase - 2.0 * p.diffraction * k * k);
    }
    fft_.backward_unscaled(A);
  } else {
    const cplx f = std::polar(amp, p.phase);
    for (auto& a : A) a *= f;
  }

  if (!p.injection.empty()) {
    const double t = std::sqrt(p.transmissivity);
    for (int i = 0; i < n; ++i) A[i] += t * p.injection[i];
  }
}

std::vector<cplx> RoundtripMap::apply(std::span<const cplx> A, const RoundtripParams& p) const {
  std::vector<cplx> out(A.begin(), A.end());
  apply_inplace(out, p);
  return out;
}

std::vector<cplx> roundtrip(std::span<const cplx> A, const RoundtripParams& p,
                            const Grid1D& grid) {
  return RoundtripMap(grid).apply(A, p);
}

FixedPointResult iterate_fixed_point(const RoundtripMap& map, std::vector<cplx> A0,
                                     RoundtripParams p, double chi,
                                     const FixedPointOptions& opts) {
  FixedPointResult r;
  r.A = std::move(A0);
  const std::size_t n = r.A.size();
  p.mirror_phase.resize(n);
  std::vector<cplx> prev(n);
  for (r.trips = 0; r.trips < opts.max_trips; ++r.trips) {
    for (std::size_t i = 0; i < n; ++i) p.mirror_phase[i] = chi * std::norm(r.A[i]);
    prev = r.A;
    map.apply_inplace(r.A, p);
    double change = 0.0, size = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      change = std::max(change, std::abs(r.A[i] - prev[i]));
      size = std::max(size, std::abs(r.A[i]));
    }
    if (!std::isfinite(size) || size > opts.blowup) {
      r.diverged = true;
      ++r.trips;
      return r;
    }
    if (change <= opts.tol * std::max(size, 1e-300)) {
      r.converged = true;
      ++r.trips;
      return r;
    }
  }
  return r;
}

FixedPointRow fixed_point_vs_hss(double T, double detuning, double pump_sq,
                                 const FixedPointOptions& opts) {
  const OracleScaling s{T, kMirrorResponse};
  constexpr int n = 8;
  RoundtripMap map(Grid1D::uniform(n, 1.0));
  RoundtripParams p;
  p.transmissivity = T;
  p.phase = s.phase(detuning);
  p.injection.assign(n, s.injection(std::sqrt(pump_sq)));

  auto fp = iterate_fixed_point(map, std::vector<cplx>(n), p, s.chi, opts);
  FixedPointRow row;
  row.T = T;
  row.detuning = detuning;
  row.pump_sq = pump_sq;
  row.trips = fp.trips;
  row.converged = fp.converged;
  row.diverged = fp.diverged;
  double mean = 0.0;
  for (const auto& a : fp.A) mean += s.intensity(a);
  row.map_intensity = mean / n;
  row.hss_intensity = hss_intensities(detuning, pump_sq).front();
  row.relative_error = std::abs(row.map_intensity - row.hss_intensity) /
                       std::max(row.hss_intensity, 1e-300);
  return row;
}

std::vector<ResidualRow> meanfield_residual(const std::vector<double>& T_values,
                                            const DynamicsOptions& opts) {
  std::vector<ResidualRow> rows;
  const double pump = std::sqrt(opts.pump_sq);
  for (double T : T_values) {
    ResidualRow row;
    row.T = T;
    try {
      const OracleScaling s{T, kMirrorResponse};
      const double trip_tau = s.round_trip_tau();
      const long steps_per_trip = std::max(1L, std::lround(trip_tau / opts.dt));
      const double dt = trip_tau / steps_per_trip;
      const long trips = std::lround(opts.tau_end / trip_tau);

      NormalizedParams np;
      np.gamma = opts.gamma;
      np.omega = opts.omega;
      np.detuning = opts.detuning;
      np.rigidity = 0.0;
      np.mirrors = 1;
      np.points_per_mirror = 2;
      np.halfwidth = 1.0;
      PumpSchedule sched;
      sched.base.amplitude = pump;
      LatticeSimulator sim(np, sched, dt);
      sim.set_uniform(0.0, 0.0);

      constexpr int n = 2;
      RoundtripMap map(Grid1D::uniform(n, 1.0));
      RoundtripParams p;
      p.transmissivity = T;
      p.phase = s.phase(opts.detuning);
      p.injection.assign(n, s.injection(pump));
      p.mirror_phase.assign(n, 0.0);
      std::vector<cplx> A(n);
      LatticeState mirror(1);
      std::vector<double> drive(1);

      double worst = 0.0;
      for (long t = 0; t < trips; ++t) {
        map.apply_inplace(A, p);
        double mean_sq = 0.0;
        for (const auto& a : A) mean_sq += std::norm(a);
        mean_sq /= n;
        drive[0] = opts.omega * opts.omega * s.chi * mean_sq;
        mirror = step_lattice(std::move(mirror), drive, trip_tau, opts.gamma, opts.omega);
        std::fill(p.mirror_phase.begin(), p.mirror_phase.end(), mirror.z[0]);
        if (!std::isfinite(mean_sq) || std::sqrt(mean_sq) > 1e6)
          throw DivergedError(0, (t + 1) * trip_tau);

        for (long k = 0; k < steps_per_trip; ++k) sim.step();
        const double di = std::abs(s.intensity(A[0]) - std::norm(sim.field()[0]));
        const double dz = std::abs(s.displacement(mirror.z[0]) - sim.lattice().z[0]);
        worst = std::max({worst, di, dz});
      }
      row.discrepancy = worst;
      row.trips = trips;
    } catch (const std::exception& e) {
      row.diverged = true;
      row.message = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

std::string residual_csv(const std::vector<ResidualRow>& rows) {
  std::string out = "T,discrepancy,trips,diverged\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%ld,%d\n", r.T, r.discrepancy, r.trips,
                  r.diverged ? 1 : 0);
    out += buf;
  }
  return out;
}

std::string fixed_point_csv(const std::vector<FixedPointRow>& rows) {
  std::string out =
      "T,detuning,pump_sq,map_intensity,hss_intensity,relative_error,trips,converged,diverged\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%ld,%d,%d\n", r.T,
                  r.detuning, r.pump_sq, r.map_intensity, r.hss_intensity, r.relative_error,
                  r.trips, r.converged ? 1 : 0, r.diverged ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace omps
