#include "omps/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace omps {

void NormalizedParams::validate() const {
  if (!(gamma > 0.0)) throw std::domain_error("gamma must be positive");
  if (!(omega > 0.0)) throw std::domain_error("omega must be positive");
  if (!(rigidity >= 0.0)) throw std::domain_error("rigidity must be nonnegative");
  if (!std::isfinite(detuning)) throw std::domain_error("detuning must be finite");
  if (mirrors < 1) throw std::domain_error("need at least one mirror");
  if (points_per_mirror < 2) throw std::domain_error("need at least two points per mirror");
  if (!(halfwidth > 0.0)) throw std::domain_error("halfwidth must be positive");
}

Normalization normalize(const PhysicalParams& phys, double laser_frequency,
                        int mirrors, int points_per_mirror) {
  using namespace constants;
  if (!(phys.transmissivity > 0.0) || !(phys.transmissivity < 1.0))
    throw std::domain_error("transmissivity must lie in (0, 1)");
  if (!(phys.cavity_length > 0.0)) throw std::domain_error("cavity length must be positive");
  if (!(phys.mirror_mass > 0.0)) throw std::domain_error("mirror mass must be positive");
  if (!(phys.mech_frequency > 0.0))
    throw std::domain_error("mechanical frequency must be positive");
  if (!(phys.mech_damping > 0.0)) throw std::domain_error("mechanical damping must be positive");
  if (!(phys.laser_wavenumber > 0.0) || !(phys.cavity_wavenumber > 0.0))
    throw std::domain_error("wavenumbers must be positive");
  if (!(phys.pitch > 0.0)) throw std::domain_error("mirror pitch must be positive");
  if (phys.gap < 0.0) throw std::domain_error("mirror gap must be nonnegative");
  if (phys.coupling_constant < 0.0) throw std::domain_error("coupling constant must be nonnegative");

  const double L = phys.cavity_length;
  const double T = phys.transmissivity;

  DerivedScales s;
  s.cavity_damping = speed_of_light * T / (4.0 * L);
  s.round_trip_time = 2.0 * L / speed_of_light;
  s.diffraction_length = std::sqrt(2.0 * L / (phys.laser_wavenumber * T));
  s.coupling_frequency = std::sqrt(phys.coupling_constant / phys.mirror_mass);
  s.transverse_speed = phys.pitch * s.coupling_frequency;
  s.surface_density = phys.mirror_mass / (phys.pitch * phys.pitch);
  s.displacement_scale = 4.0 * phys.laser_wavenumber / T;
  s.field_scale = (2.0 / phys.mech_frequency) *
                  std::sqrt(2.0 * hbar * phys.cavity_wavenumber * phys.laser_wavenumber *
                            phys.pitch / (s.round_trip_time * phys.mirror_mass * T));

  NormalizedParams p;
  p.gamma = phys.mech_damping / s.cavity_damping;
  p.omega = phys.mech_frequency / s.cavity_damping;
  const double cavity_frequency = phys.cavity_wavenumber * speed_of_light;
  p.detuning = (laser_frequency - cavity_frequency) / s.cavity_damping;
  p.rigidity = s.transverse_speed / (phys.mech_frequency * s.diffraction_length);
  p.mirrors = mirrors;
  p.points_per_mirror = points_per_mirror;
  p.halfwidth = mirrors * phys.pitch / (2.0 * s.diffraction_length);
  p.validate();
  return {p, s};
}

double photon_flux(cplx amplitude) { return std::norm(amplitude); }

double radiation_pressure(cplx amplitude, double cavity_wavenumber, double round_trip_time) {
  return constants::hbar * cavity_wavenumber / round_trip_time * std::norm(amplitude);
}

double hss_residual(double intensity, double detuning, double pump_sq) {
  const double s = detuning + intensity;
  return intensity * (1.0 + s * s) - pump_sq;
}

namespace {

// Bisection on a monotone bracket down to adjacent doubles.
double bisect(double lo, double hi, double detuning, double pump_sq) {
  double flo = hss_residual(lo, detuning, pump_sq);
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fmid = hss_residual(mid, detuning, pump_sq);
    if (fmid == 0.0) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  const double flo_abs = std::abs(hss_residual(lo, detuning, pump_sq));
  const double fhi_abs = std::abs(hss_residual(hi, detuning, pump_sq));
  return flo_abs <= fhi_abs ? lo : hi;
}

}  // namespace

std::vector<double> hss_intensities(double detuning, double pump_sq) {
  if (!(pump_sq >= 0.0)) throw std::domain_error("pump intensity must be nonnegative");
  const double scan_max = std::max(20.0, 4.0 * pump_sq);

  // The cubic is monotone between its turning points, the roots of
  // 3 I^2 + 4 detuning I + detuning^2 + 1.
  std::vector<double> breaks{0.0};
  const double disc = detuning * detuning - 3.0;
  if (disc > 0.0) {
    const double r = std::sqrt(disc);
    for (double t : {(-2.0 * detuning - r) / 3.0, (-2.0 * detuning + r) / 3.0})
      if (t > 0.0 && t < scan_max) breaks.push_back(t);
  }
  breaks.push_back(scan_max);

  const double tol = 1e-12 * std::max(1.0, pump_sq);
  std::vector<double> roots;
  auto push = [&](double r) {
    if (roots.empty() || std::abs(r - roots.back()) > 1e-9) roots.push_back(r);
  };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    const double fa = hss_residual(a, detuning, pump_sq);
    const double fb = hss_residual(b, detuning, pump_sq);
    if (fa == 0.0 || (i > 0 && std::abs(fa) <= tol)) {
      push(a);
      continue;
    }
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      if (i + 2 < breaks.size() && std::abs(fb) <= tol) continue;  // degenerate, taken at b
      push(bisect(a, b, detuning, pump_sq));
    }
  }
  return roots;
}

HomogeneousState hss_field(double intensity, double detuning, double pump) {
  const double pump_sq = pump * pump;
  const double residual = hss_residual(intensity, detuning, pump_sq);
  if (!(std::abs(residual) <= 1e-8 * std::max(1.0, pump_sq)))
    throw std::invalid_argument("intensity " + std::to_string(intensity) +
                                " is not a homogeneous steady state (residual " +
                                std::to_string(residual) + ")");
  HomogeneousState s;
  s.intensity = intensity;
  s.pump = pump;
  s.displacement = intensity;
  s.field = pump / cplx(1.0, -(detuning + intensity));
  return s;
}

GrowthRates linearized_spectrum(const HomogeneousState& state, double k, double detuning,
                                double gamma, double omega, double stiffness) {
  const double theta = detuning + state.displacement - k * k;
  const double fr = state.field.real();
  const double fi = state.field.imag();
  const double om2 = omega * omega;

  Eigen::Matrix4d jac;
  // clang-format off
  jac << -1.0,       -theta,      -fi,        0.0,
         theta,      -1.0,         fr,        0.0,
          0.0,        0.0,         0.0,       1.0,
          2*om2*fr,   2*om2*fi,   -stiffness, -gamma;
  // clang-format on
  Eigen::EigenSolver<Eigen::Matrix4d> solver(jac, false);
  const auto& ev = solver.eigenvalues();
  GrowthRates out;
  for (int i = 0; i < 4; ++i) out[i] = ev[i];
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return out;
}

GrowthRates linear_stability(const HomogeneousState& state, double k,
                             const NormalizedParams& params) {
  const double om2 = params.omega * params.omega;
  const double rho = params.rigidity;
  return linearized_spectrum(state, k, params.detuning, params.gamma, params.omega,
                             om2 * (1.0 + rho * rho * k * k));
}

double max_growth_rate(const GrowthRates& rates) {
  double m = rates[0].real();
  for (const auto& r : rates) m = std::max(m, r.real());
  return m;
}

std::vector<StabilitySample> stability_scan(const HomogeneousState& state,
                                            const NormalizedParams& params, double k_max,
                                            int samples) {
  if (samples < 2) throw std::domain_error("stability scan needs at least two samples");
  std::vector<StabilitySample> out;
  out.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double k = k_max * i / (samples - 1);
    out.push_back({k, max_growth_rate(linear_stability(state, k, params))});
  }
  return out;
}

}  // namespace omps
