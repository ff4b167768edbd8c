#pragma once

#include <array>
#include <complex>
#include <vector>

namespace omps {

using cplx = std::complex<double>;

namespace constants {
inline constexpr double speed_of_light = 299792458.0;        // m/s
inline constexpr double hbar = 1.054571817e-34;              // J s
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double vacuum_permeability = 1.25663706212e-6;  // N/A^2
}  // namespace constants

// Dimensional description of the cavity and the micromirror array (SI units).
struct PhysicalParams {
  double cavity_length = 0.0;      // L
  double transmissivity = 0.0;     // T of the coupling mirror, 0 < T < 1
  double laser_wavenumber = 0.0;   // k_L
  double cavity_wavenumber = 0.0;  // k_c
  double mirror_mass = 0.0;        // m
  double mech_damping = 0.0;       // gamma_m
  double mech_frequency = 0.0;     // Omega_m
  double coupling_constant = 0.0;  // kappa_perp
  double pitch = 0.0;              // a
  double gap = 0.0;                // b, assumed << a
  double voltage_constant = 0.0;   // only fixes absolute field units
};

// Dimensionless model constants. Time is in units of 1/gamma_c and space in
// units of the diffraction length l_c.
struct NormalizedParams {
  double gamma = 0.1;
  double omega = 10.0;
  double detuning = -2.2;
  double rigidity = 1.13;
  int mirrors = 20;
  int points_per_mirror = 11;
  double halfwidth = 40.0;

  double mirror_size() const { return 2.0 * halfwidth / mirrors; }
  int grid_points() const { return mirrors * points_per_mirror; }

  // Throws std::domain_error when an invariant is violated.
  void validate() const;
};

struct DerivedScales {
  double cavity_damping = 0.0;       // gamma_c = cT/4L
  double round_trip_time = 0.0;      // t_c = 2L/c
  double diffraction_length = 0.0;   // l_c, l_c^2 = 2L/(k_L T)
  double transverse_speed = 0.0;     // v = a Omega_perp
  double surface_density = 0.0;      // sigma = m/a^2
  double coupling_frequency = 0.0;   // Omega_perp = sqrt(kappa/m)
  double displacement_scale = 0.0;   // z = displacement_scale * q
  double field_scale = 0.0;          // F = field_scale * A
};

struct Normalization {
  NormalizedParams params;
  DerivedScales scales;
};

// Maps physical parameters onto the dimensionless model for an array of
// `mirrors` elements sampled with `points_per_mirror` field points each.
// Omega is measured in units of gamma_c.
Normalization normalize(const PhysicalParams& phys, double laser_frequency,
                        int mirrors, int points_per_mirror);

// Photons per unit area arriving during one round trip.
double photon_flux(cplx amplitude);

// Radiation pressure (N/m^2) of the forward wave on the moving mirror.
double radiation_pressure(cplx amplitude, double cavity_wavenumber,
                          double round_trip_time);

// Residual of the homogeneous steady-state cubic I (1 + (detuning + I)^2) - E0^2.
double hss_residual(double intensity, double detuning, double pump_sq);

// All real nonnegative roots of the homogeneous steady-state cubic, ascending.
// A root sitting exactly on a turning point is reported once.
std::vector<double> hss_intensities(double detuning, double pump_sq);

struct HomogeneousState {
  double intensity = 0.0;
  cplx field{};
  double displacement = 0.0;
  double pump = 0.0;
};

// Field and mirror displacement of the homogeneous state with intensity I.
// Throws std::invalid_argument if I does not solve the cubic to 1e-8.
HomogeneousState hss_field(double intensity, double detuning, double pump);

using GrowthRates = std::array<cplx, 4>;

// Eigenvalues of the real 4x4 linearization in (Re dF, Im dF, dZ, dZ') about
// `state` for a transverse perturbation of wavenumber k. `stiffness` is the
// restoring coefficient of the mechanical mode at that wavenumber.
GrowthRates linearized_spectrum(const HomogeneousState& state, double k,
                                double detuning, double gamma, double omega,
                                double stiffness);

// Continuum-coupled case: stiffness Omega^2 (1 + rho^2 k^2).
GrowthRates linear_stability(const HomogeneousState& state, double k,
                             const NormalizedParams& params);

double max_growth_rate(const GrowthRates& rates);

struct StabilitySample {
  double wavenumber = 0.0;
  double growth_rate = 0.0;
};

// max Re(lambda) on a uniform wavenumber grid over [0, k_max].
std::vector<StabilitySample> stability_scan(const HomogeneousState& state,
                                            const NormalizedParams& params,
                                            double k_max, int samples);

}  // namespace omps
