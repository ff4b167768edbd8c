#include "omps/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace omps {

namespace {
// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Grid1D Grid1D::uniform(int n, double halfwidth) {
  if (n < 2) throw std::domain_error("grid needs at least two points");
  if (!(halfwidth > 0.0)) throw std::domain_error("grid halfwidth must be positive");
  Grid1D g;
  g.n = n;
  g.halfwidth = halfwidth;
  g.dx = 2.0 * halfwidth / n;
  g.x.resize(n);
  g.k.resize(n);
  const double dk = 2.0 * std::numbers::pi / (2.0 * halfwidth);
  for (int i = 0; i < n; ++i) {
    g.x[i] = -halfwidth + (i + 0.5) * g.dx;
    const int m = i < (n + 1) / 2 ? i : i - n;
    g.k[i] = m * dk;
  }
  return g;
}

struct Fft::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Fft::Fft(int n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n < 1) throw std::domain_error("transform length must be positive");
  std::lock_guard lock(planner_mutex());
  auto* buf = fftw_alloc_complex(n);
  // ESTIMATE keeps plan selection, and therefore rounding, reproducible.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->fwd = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, flags);
  plans_->bwd = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, flags);
  fftw_free(buf);
  if (!plans_->fwd || !plans_->bwd) throw std::runtime_error("FFTW planning failed");
}

Fft::~Fft() {
  if (!plans_) return;
  std::lock_guard lock(planner_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(std::span<std::complex<double>> data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->fwd, p, p);
}

void Fft::backward_unscaled(std::span<std::complex<double>> data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->bwd, p, p);
}

void Fft::backward(std::span<std::complex<double>> data) const {
  backward_unscaled(data);
  const double s = 1.0 / n_;
  for (auto& c : data) c *= s;
}

std::vector<double> fourier_interpolate(const Grid1D& from, std::span<const double> values,
                                        std::span<const double> positions) {
  const int n = from.n;
  std::vector<std::complex<double>> spec(values.begin(), values.end());
  Fft fft(n);
  fft.forward(spec);
  std::vector<double> out(positions.size());
  const bool even = n % 2 == 0;
  for (std::size_t p = 0; p < positions.size(); ++p) {
    const double u = positions[p] - from.x[0];
    std::complex<double> acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double k = from.k[i];
      std::complex<double> c = spec[i];
      if (even && i == n / 2) {
        // split the Nyquist mode symmetrically so the interpolant stays real
        acc += c * std::cos(k * u);
        continue;
      }
      acc += c * std::polar(1.0, k * u);
    }
    out[p] = acc.real() / n;
  }
  return out;
}

}  // namespace omps
