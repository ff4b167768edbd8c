#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "omps/analysis.hpp"
#include "omps/config.hpp"

namespace omps {

struct RunOutcome {
  bool diverged = false;
  bool steady = false;
  double tau = 0.0;
  std::string message;
  PatternReport report;
  std::optional<PersistenceReport> persistence;
  std::vector<std::filesystem::path> files;

  int exit_status() const { return diverged ? 2 : 0; }
};

// Builds the simulator for a lattice or continuum config, seeded and
// initialized. Oracle configs are rejected.
std::unique_ptr<Simulator> make_simulator(const RunConfig& c);

// Runs one configuration and writes into c.output.dir:
//   config.ini, snapshots/snap_NNNNNN.omps, final.csv, plot.gp, report.txt
// Oracle mode writes fixed_point.csv and residual.csv instead. A diverged run
// keeps what was written and reports a nonzero exit status.
RunOutcome run(const RunConfig& c);

struct SweepAxis {
  std::string name;  // N, E0sq, delta or rho
  std::vector<double> values;
};

// "N=5,7,10" or "E0sq=2.0:2.8:5" (start:stop:count, inclusive).
SweepAxis parse_axis(const std::string& spec);
void apply_axis(RunConfig& c, const std::string& name, double value);

struct SweepRow {
  int index = 0;
  std::vector<double> values;
  std::string cls;
  double contrast = 0.0;
  double wavenumber = 0.0;
  int peaks = 0;
  bool steady = false;
  std::string status;  // ok, diverged or error
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int resumed = 0;  // points taken from the manifest
};

// Cartesian product of the axes, one run per point in <dir>/point_NNNN.
// Completed points are appended to <dir>/manifest.txt and skipped when the
// sweep is restarted. Points run on up to OMPS_THREADS worker threads.
// With no axes this is a single run() into c.output.dir.
SweepResult sweep(const RunConfig& c, const std::vector<SweepAxis>& axes);

std::string sweep_csv(const std::vector<SweepAxis>& axes, const SweepResult& r);

// OMPS_THREADS if set and positive, else the hardware concurrency (at least 1).
int worker_threads();

}  // namespace omps
