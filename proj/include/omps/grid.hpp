#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace omps {

// Uniform periodic grid on [-halfwidth, halfwidth) with cell-centred samples,
// so that groups of M consecutive cells tile the micromirrors exactly.
struct Grid1D {
  int n = 0;
  double halfwidth = 0.0;
  double dx = 0.0;
  std::vector<double> x;
  std::vector<double> k;  // discrete Fourier conjugate wavenumbers, FFT order

  static Grid1D uniform(int n, double halfwidth);
};

// In-place complex DFT of fixed length backed by FFTW. Forward is unnormalized;
// backward is scaled by 1/n so that backward(forward(f)) == f.
class Fft {
 public:
  explicit Fft(int n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;

  int size() const { return n_; }
  void forward(std::span<std::complex<double>> data) const;
  // Unscaled inverse transform; callers fold the 1/n into their multipliers.
  void backward_unscaled(std::span<std::complex<double>> data) const;
  void backward(std::span<std::complex<double>> data) const;

 private:
  struct Plans;
  int n_;
  std::unique_ptr<Plans> plans_;
};

// Band-limited (trigonometric) interpolation of periodic samples on `from`
// evaluated at arbitrary positions.
std::vector<double> fourier_interpolate(const Grid1D& from, std::span<const double> values,
                                        std::span<const double> positions);

}  // namespace omps
