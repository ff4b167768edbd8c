#pragma once

#include <string>
#include <vector>

#include "omps/grid.hpp"
#include "omps/model.hpp"

namespace omps {

// One cavity round trip in unnormalized variables:
//   A' = sqrt(R) e^{i phase} U^2 e^{2 i kQ} A + sqrt(T) A_inj,   R = 1 - T,
// where kQ is the mirror phase k_L Q (radians) on the grid and U^2 is the
// double-pass paraxial propagator exp(-2 i diffraction k^2).
struct RoundtripParams {
  double transmissivity = 0.01;  // T
  double phase = 0.0;            // delta
  double diffraction = 0.0;      // L / (2 k_L), squared grid length units, per pass
  std::vector<double> mirror_phase;
  std::vector<cplx> injection;

  double reflectivity() const { return 1.0 - transmissivity; }
  void validate(std::size_t n) const;
};

class RoundtripMap {
 public:
  explicit RoundtripMap(Grid1D grid);
  std::vector<cplx> apply(std::span<const cplx> A, const RoundtripParams& p) const;
  void apply_inplace(std::span<cplx> A, const RoundtripParams& p) const;
  const Grid1D& grid() const { return grid_; }

 private:
  Grid1D grid_;
  Fft fft_;
};

std::vector<cplx> roundtrip(std::span<const cplx> A, const RoundtripParams& p,
                            const Grid1D& grid);

// Mirror response for the oracle: the steady mirror phase is chi |A|^2.
inline constexpr double kMirrorResponse = 1.0;

// Normalized quantities the oracle reports at comparison time, for a map run at
// transmissivity T and response chi.
struct OracleScaling {
  double T = 0.01;
  double chi = kMirrorResponse;

  double detuning(double phase) const { return 2.0 * phase / T; }
  double phase(double detuning) const { return 0.5 * detuning * T; }
  double round_trip_tau() const { return 0.5 * T; }
  double intensity(cplx A) const { return 4.0 * chi * std::norm(A) / T; }
  double displacement(double mirror_phase) const { return 4.0 * mirror_phase / T; }
  // Injection amplitude that corresponds to a normalized pump E.
  double injection(double pump) const { return pump * T / (4.0 * std::sqrt(chi)); }
  // Field amplitude corresponding to a normalized field F.
  cplx amplitude(cplx F) const { return F * std::sqrt(T / (4.0 * chi)); }
};

struct FixedPointOptions {
  long max_trips = 2'000'000;
  double tol = 1e-13;      // sup-norm change per trip, relative to sup |A|
  double blowup = 1e6;     // divergence guard on |A|
};

struct FixedPointResult {
  std::vector<cplx> A;
  long trips = 0;
  bool converged = false;
  bool diverged = false;
};

// Plain forward iteration from A0 with the mirror phase held at chi |A|^2
// pointwise after every trip.
FixedPointResult iterate_fixed_point(const RoundtripMap& map, std::vector<cplx> A0,
                                     RoundtripParams p, double chi,
                                     const FixedPointOptions& opts = {});

struct FixedPointRow {
  double T = 0.0;
  double detuning = 0.0;
  double pump_sq = 0.0;
  double map_intensity = 0.0;
  double hss_intensity = 0.0;
  double relative_error = 0.0;
  long trips = 0;
  bool converged = false;
  bool diverged = false;
};

// Fixed point of the map under a flat injection against the lowest HSS of
// the mean-field model.
FixedPointRow fixed_point_vs_hss(double T, double detuning, double pump_sq,
                                 const FixedPointOptions& opts = {});

struct DynamicsOptions {
  double gamma = 0.1;
  double omega = 10.0;
  double detuning = -2.2;
  double pump_sq = 1.5;
  double tau_end = 10.0;
  double dt = 1e-3;  // mean-field solver step
};

struct ResidualRow {
  double T = 0.0;
  double discrepancy = 0.0;  // sup over matched times of |dI| and |dZ|
  long trips = 0;
  bool diverged = false;
  std::string message;
};

// Map with the mirror co-evolving through one independent-oscillator step of
// dtau = T/2 per trip, against the mean-field lattice solver from the same
// dark, flat initial state, compared at every round trip.
std::vector<ResidualRow> meanfield_residual(const std::vector<double>& T_values,
                                            const DynamicsOptions& opts = {});

std::string residual_csv(const std::vector<ResidualRow>& rows);
std::string fixed_point_csv(const std::vector<FixedPointRow>& rows);

}  // namespace omps
