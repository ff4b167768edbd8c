#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omps/model.hpp"
#include "omps/pump.hpp"
#include "omps/snapshot.hpp"

namespace omps {

enum class PatternClass { homogeneous, periodic, localized, mixed, unsteady };

std::string_view to_string(PatternClass c);

struct Peak {
  double position = 0.0;
  double height = 0.0;
  double fwhm = 0.0;
  double contrast = 0.0;  // height / background
};

struct ClassifyThresholds {
  double var_eps = 1e-4;           // relative variance below which a state is flat
  double min_contrast = 2.0;       // peak height over background
  double plateau_fraction = 0.8;   // plateau is |x| < fraction * sigma_x
  int max_peaks = 4;               // more isolated peaks than this is not localized
  double periodic_fraction = 0.5;  // share of non-DC power in the dominant line
};

struct PatternReport {
  PatternClass cls = PatternClass::unsteady;
  std::optional<double> wavenumber;
  std::vector<Peak> peaks;
  double background = 0.0;
  double contrast = 1.0;
  double relative_variance = 0.0;
  double line_fraction = 0.0;  // power fraction of the dominant spectral line
};

// Peaks above min_contrast times the median plateau intensity.
struct PeakSearch {
  double background = 0.0;
  std::vector<Peak> peaks;
};
PeakSearch find_peaks(std::span<const double> x, std::span<const double> intensity,
                      double pump_width, const ClassifyThresholds& th = {});
// Same with a given background level.
PeakSearch find_peaks(std::span<const double> x, std::span<const double> intensity,
                      double pump_width, double background, const ClassifyThresholds& th = {});
// Median intensity over the plateau.
double plateau_median(std::span<const double> x, std::span<const double> intensity,
                      double pump_width, const ClassifyThresholds& th = {});

// Dominant nonzero wavenumber of the plateau intensity and the fraction of the
// non-DC power carried by that spectral line (bin and both neighbours).
struct SpectralLine {
  double wavenumber = 0.0;
  double fraction = 0.0;
};
SpectralLine dominant_line(std::span<const double> x, std::span<const double> intensity,
                           double pump_width, const ClassifyThresholds& th = {});

// First match wins: unsteady, homogeneous, localized (1..max_peaks peaks),
// periodic, mixed. `pump_width` is sigma_x (infinite for a flat pump).
PatternReport classify(const Snapshot& s, double pump_width, bool steady,
                       const ClassifyThresholds& th = {});
PatternReport classify(std::span<const double> x, std::span<const double> intensity,
                       double pump_width, bool steady, const ClassifyThresholds& th = {});

std::string report_text(const PatternReport& r);

struct BranchPoint {
  double intensity = 0.0;
  bool stable = false;  // against homogeneous (k = 0) perturbations
};

struct BistabilityRow {
  double pump_sq = 0.0;
  std::vector<BranchPoint> branches;
};

// Homogeneous steady states over E0^2 in [pump_sq_min, pump_sq_max].
std::vector<BistabilityRow> bistability_curve(const NormalizedParams& params, double pump_sq_min,
                                              double pump_sq_max, int samples);

std::string bistability_csv(const std::vector<BistabilityRow>& rows);

// Beams with |phase| < pi/2 write, the others erase.
bool is_write_beam(const AddressBeam& b);

struct WriteOutcome {
  std::string id;
  double center = 0.0;
  double beam_off = 0.0;
  bool written = false;
  double survived_tau = 0.0;  // time after beam-off the structure stayed detectable
};

struct EraseOutcome {
  std::string id;
  double center = 0.0;
  bool present_before = false;
  bool erased = false;
};

struct PersistenceReport {
  bool written = false;         // first write persisted
  bool second_written = false;  // second write persisted
  double survived_tau = 0.0;    // of the first structure
  double disturbance_pct = 0.0;
  bool erased = false;          // every erase beam removed its structure
  std::vector<WriteOutcome> writes;
  std::vector<EraseOutcome> erases;
};

struct PersistenceOptions {
  double min_survival = 50.0;  // tau after beam-off
  double restore_tol = 0.1;    // relative deviation from background after erasure
  ClassifyThresholds thresholds;
};

// Evaluates a write/erase protocol over a time-ordered snapshot series.
PersistenceReport soliton_persistence(const std::vector<Snapshot>& series,
                                      const PumpSchedule& schedule,
                                      const PersistenceOptions& opts = {});

std::string persistence_text(const PersistenceReport& r);

struct ErasePhaseRow {
  double phase = 0.0;
  bool erased = false;
  double residual_contrast = 0.0;  // largest contrast left near the beam centre
};

// Runs the lattice from the written state once per trial phase of `erase`
// and reports which phases remove the structure.
std::vector<ErasePhaseRow> erase_phase_scan(const NormalizedParams& params,
                                            const PumpSchedule& schedule,
                                            const AddressBeam& erase,
                                            const std::vector<double>& phases, double tau_end,
                                            std::uint64_t seed, double dt);

}  // namespace omps
