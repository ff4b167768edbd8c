#include "omps/pump.hpp"

#include <cmath>
#include <stdexcept>

namespace omps {

double BasePump::at(double x) const {
  if (std::isinf(width)) return amplitude;
  return amplitude * std::exp(-0.5 * std::pow(x / width, exponent));
}

void PumpSchedule::validate() const {
  if (!(base.width > 0.0)) throw std::domain_error("pump width must be positive");
  if (base.exponent < 2 || base.exponent % 2 != 0)
    throw std::domain_error("pump exponent must be an even integer >= 2");
  for (const auto& b : beams) {
    if (!(b.width > 0.0)) throw std::domain_error("beam '" + b.id + "' width must be positive");
    if (!(b.start < b.stop))
      throw std::domain_error("beam '" + b.id + "' must switch on before it switches off");
  }
}

void build_pump(const PumpSchedule& sched, const Grid1D& grid, double tau,
                std::span<std::complex<double>> out) {
  for (int i = 0; i < grid.n; ++i) out[i] = sched.base.at(grid.x[i]);
  for (const auto& b : sched.beams) {
    if (!b.active(tau)) continue;
    const double inv = 1.0 / (2.0 * b.width * b.width);
    for (int i = 0; i < grid.n; ++i) {
      const double d = grid.x[i] - b.center;
      out[i] += b.amplitude * std::exp(-d * d * inv);
    }
  }
}

std::vector<std::complex<double>> build_pump(const PumpSchedule& sched, const Grid1D& grid,
                                             double tau) {
  std::vector<std::complex<double>> out(grid.n);
  build_pump(sched, grid, tau, out);
  return out;
}

}  // namespace omps
