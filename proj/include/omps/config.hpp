#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "omps/field_solver.hpp"
#include "omps/model.hpp"
#include "omps/pump.hpp"

namespace omps {

enum class RunMode { lattice, continuum, oracle };

struct IntegratorOptions {
  double dt = kDefaultStep;
  double tau_end = 300.0;
  std::uint64_t seed = 1;
  double snapshot_interval = 1.0;
  double steady_tol = 1e-8;
  int steady_consecutive = 10;
  double noise = kDefaultNoise;
  bool stop_when_steady = false;
};

struct OutputOptions {
  std::string dir = "out";
  bool snapshots = true;
  bool csv = true;
  bool gnuplot = false;
};

struct RunConfig {
  std::string name = "run";
  RunMode mode = RunMode::lattice;
  NormalizedParams params;
  PumpSchedule pump;
  IntegratorOptions integrator;
  OutputOptions output;
  int continuum_points = 1024;

  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// Line-oriented "[section]" / "key = value" text; '#' and ';' start comments.
// Sections: model, pump, beam.<id>, integrator, output, run. Unknown sections
// or keys are errors. Missing keys keep the RunConfig defaults.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);
std::string format_config(const RunConfig& c);

std::string_view to_string(RunMode m);

std::vector<std::string> preset_names();
// Throws std::invalid_argument for an unknown name.
RunConfig preset(const std::string& name);

}  // namespace omps
