#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace omps {

// Displacements and velocities of the micromirrors, dimensionless.
struct LatticeState {
  std::vector<double> z;
  std::vector<double> v;

  LatticeState() = default;
  explicit LatticeState(int mirrors) : z(mirrors, 0.0), v(mirrors, 0.0) {}
  int size() const { return static_cast<int>(z.size()); }
};

// Weights d_0..d_{M+1} of the per-mirror intensity quadrature. d_0 and d_{M+1}
// act on the last point of the previous mirror and the first point of the next.
struct QuadratureWeights {
  int points_per_mirror = 0;
  std::vector<double> d;
};

// {1, 23, 24, ..., 24, 23, 1} / (24 M). Throws std::domain_error for M < 2.
QuadratureWeights quadrature_weights(int points_per_mirror);

// Nearest-neighbour elastic acceleration on mirror j with free ends.
double coupling_accel(std::span<const double> z, int j, double rigidity, double omega,
                      double mirror_size);

// Omega^2 times the quadrature of |F|^2 over mirror j. `intensity` holds
// N*M samples in mirror-major order. At the array ends the missing stencil
// point's weight is folded onto the nearest in-domain point.
double radiation_accel(std::span<const double> intensity, int j,
                       const QuadratureWeights& weights, double omega);

// radiation_accel for every mirror.
void radiation_drive(std::span<const double> intensity, const QuadratureWeights& weights,
                     double omega, std::span<double> out);

// Exact flow of y'' + gamma y' + stiffness y = 0 over a fixed dt, as a 2x2
// propagator acting on (y, y').
class OscillatorFlow {
 public:
  OscillatorFlow() = default;
  OscillatorFlow(double stiffness, double gamma, double dt);

  // Advances (z, v) under z'' + gamma z' + stiffness z = drive, drive constant.
  void advance(double& z, double& v, double drive) const {
    const double rest = drive / stiffness_;
    const double y = z - rest;
    z = rest + yy_ * y + yv_ * v;
    v = vy_ * y + vv_ * v;
  }

  double stiffness() const { return stiffness_; }

 private:
  double stiffness_ = 1.0;
  double yy_ = 1.0, yv_ = 0.0, vy_ = 0.0, vv_ = 1.0;
};

// Independent mirrors: every (z_j, v_j) follows the exact flow of the damped
// oscillator with its own constant drive over dt. Throws for dt <= 0.
LatticeState step_lattice(LatticeState state, std::span<const double> drive, double dt,
                          double gamma, double omega);

// Elastic potential (rho^2 Omega^2 / a^2) * sum over bonds of (dz)^2 / 2.
double elastic_energy(std::span<const double> z, double rigidity, double omega,
                      double mirror_size);

// Kinetic plus on-site plus elastic energy.
double mechanical_energy(const LatticeState& state, double rigidity, double omega,
                         double mirror_size);

// Exact flow of the coupled free-ended chain
//   z'' + gamma z' + K z = r,   K = Omega^2 (I + (rho/a)^2 Lap),
// with the radiation drive r frozen over the step. K is diagonalized once and
// every normal mode is advanced with its own OscillatorFlow.
class CoupledLatticeFlow {
 public:
  CoupledLatticeFlow(int mirrors, double rigidity, double omega, double mirror_size,
                     double gamma, double dt);

  void advance(LatticeState& state, std::span<const double> radiation) const;

  // Squared normal-mode frequencies, ascending.
  const Eigen::VectorXd& mode_stiffness() const { return stiffness_; }
  const Eigen::MatrixXd& modes() const { return modes_; }
  double dt() const { return dt_; }

 private:
  int n_;
  double dt_;
  Eigen::MatrixXd modes_;
  Eigen::VectorXd stiffness_;
  std::vector<OscillatorFlow> flows_;
  mutable Eigen::VectorXd zm_, vm_, rm_;
};

// Piecewise-constant expansion Z(x) = sum_j z_j w_j(x) onto the field grid.
void expand_to_grid(std::span<const double> z, int points_per_mirror, std::span<double> out);
std::vector<double> expand_to_grid(std::span<const double> z, int points_per_mirror);

}  // namespace omps
