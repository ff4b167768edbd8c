#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "omps/field_solver.hpp"

namespace omps {

inline constexpr int kDefaultContinuumPoints = 1024;

// Continuum mechanical field
//   Z'' + gamma Z' + Omega^2 Z - rho^2 Omega^2 Z_xx = Omega^2 |F|^2
// on the same periodic window as the field. The mechanics are advanced with
// the exact damped-oscillator flow of every Fourier mode; the field split is
// the same as in LatticeSimulator with Z sampled pointwise.
class ContinuumSimulator final : public Simulator {
 public:
  ContinuumSimulator(const NormalizedParams& params, int n_points, PumpSchedule schedule,
                     double dt = kDefaultStep);

  void step() override;
  std::vector<double> displacement_field() const override { return Z_; }
  Snapshot snapshot() const override;
  void initialize(std::uint64_t seed, double noise = kDefaultNoise) override;
  void set_uniform(cplx field, double displacement) override;

  std::span<const double> Z() const { return Z_; }
  std::span<const double> W() const { return W_; }
  void set_mechanics(std::span<const double> Z, std::span<const double> W);
  // Squared frequency of the Fourier mode with wavenumber k.
  double mode_stiffness(double k) const;

 private:
  void nonlinear_half(double h);
  void mechanics();

  std::vector<double> Z_, W_;
  std::vector<OscillatorFlow> flows_;
  Fft fft_;
  std::vector<cplx> zs_, ws_, rs_;
};

struct ConvergenceOptions {
  double tau_end = 300.0;
  double dt = kDefaultStep;
  std::uint64_t seed = 1;
  double noise = kDefaultNoise;
  int continuum_points = kDefaultContinuumPoints;
  SteadyCheck steady;
  bool stop_when_steady = true;
};

struct ConvergenceRow {
  int mirrors = 0;
  double mirror_size = 0.0;
  double intensity_distance = 0.0;  // L2 over the window
  double displacement_distance = 0.0;  // L2 of z_j against mirror means of Z
  double distance = 0.0;  // sqrt of the sum of squares of the two above
  bool steady = false;
  bool diverged = false;
  std::string message;
  Snapshot state;  // final lattice state
};

struct ConvergenceTable {
  Snapshot reference;
  bool reference_steady = false;
  std::vector<ConvergenceRow> rows;
};

// Mean of a band-limited periodic function over [lo, hi], evaluated exactly
// from its samples on `grid`.
std::vector<double> interval_means(const Grid1D& grid, std::span<const double> values,
                                   std::span<const double> edges);

// Runs the continuum reference once and the lattice for every N in
// `mirror_counts` (same window, pump, seed) and tabulates their steady-state
// distances. Intensities are compared pointwise on the lattice grid after
// spectral interpolation of the reference. A diverged member run yields a
// flagged row; the table continues.
ConvergenceTable discrete_vs_continuum(const NormalizedParams& base,
                                       const PumpSchedule& schedule,
                                       const std::vector<int>& mirror_counts,
                                       const ConvergenceOptions& opts);

// Distances between a lattice snapshot and a continuum snapshot on any grid.
ConvergenceRow compare_to_continuum(const Snapshot& lattice, const Snapshot& continuum,
                                    double halfwidth);

}  // namespace omps
