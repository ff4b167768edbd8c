#pragma once

#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "omps/grid.hpp"

namespace omps {

// Super-Gaussian flat-top injection E0 exp(-(x/sigma)^p / 2). sigma = +inf
// gives a spatially uniform pump.
struct BasePump {
  double amplitude = 0.0;  // E0
  double width = std::numeric_limits<double>::infinity();  // sigma_x
  int exponent = 20;       // p, even

  double at(double x) const;
};

// Gaussian address beam active for tau in [start, stop).
struct AddressBeam {
  std::string id;
  std::complex<double> amplitude{};  // carries the beam phase
  double center = 0.0;
  double width = 1.0;
  double start = 0.0;
  double stop = 0.0;

  bool active(double tau) const { return tau >= start && tau < stop; }
  double phase() const { return std::arg(amplitude); }
};

struct PumpSchedule {
  BasePump base;
  std::vector<AddressBeam> beams;

  // Throws std::domain_error on an invalid width, exponent or beam window.
  void validate() const;
};

// E(x, tau) on the grid.
std::vector<std::complex<double>> build_pump(const PumpSchedule& sched, const Grid1D& grid,
                                             double tau);
void build_pump(const PumpSchedule& sched, const Grid1D& grid, double tau,
                std::span<std::complex<double>> out);

}  // namespace omps
