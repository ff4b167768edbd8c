#include "omps/lattice.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace omps {

QuadratureWeights quadrature_weights(int points_per_mirror) {
  const int m = points_per_mirror;
  if (m < 2) throw std::domain_error("quadrature needs at least two points per mirror");
  QuadratureWeights w;
  w.points_per_mirror = m;
  w.d.assign(m + 2, 24.0);
  w.d.front() = w.d.back() = 1.0;
  w.d[1] = w.d[m] = 23.0;
  for (double& x : w.d) x /= 24.0 * m;
  return w;
}

double coupling_accel(std::span<const double> z, int j, double rigidity, double omega,
                      double mirror_size) {
  const int n = static_cast<int>(z.size());
  double sum = 0.0;
  if (j > 0) sum += z[j - 1] - z[j];
  if (j + 1 < n) sum += z[j + 1] - z[j];
  const double c = rigidity * omega / mirror_size;
  return c * c * sum;
}

double radiation_accel(std::span<const double> intensity, int j,
                       const QuadratureWeights& weights, double omega) {
  const int m = weights.points_per_mirror;
  const int mirrors = static_cast<int>(intensity.size()) / m;
  const auto& d = weights.d;
  const std::size_t base = static_cast<std::size_t>(j) * m;

  double acc = 0.0;
  for (int l = 1; l <= m; ++l) acc += d[l] * intensity[base + l - 1];
  if (j > 0)
    acc += d[0] * intensity[base - 1];
  else
    acc += d[0] * intensity[base];
  if (j + 1 < mirrors)
    acc += d[m + 1] * intensity[base + m];
  else
    acc += d[m + 1] * intensity[base + m - 1];
  return omega * omega * acc;
}

void radiation_drive(std::span<const double> intensity, const QuadratureWeights& weights,
                     double omega, std::span<double> out) {
  const int mirrors = static_cast<int>(out.size());
  for (int j = 0; j < mirrors; ++j) out[j] = radiation_accel(intensity, j, weights, omega);
}

OscillatorFlow::OscillatorFlow(double stiffness, double gamma, double dt)
    : stiffness_(stiffness) {
  if (!(stiffness > 0.0)) throw std::domain_error("oscillator stiffness must be positive");
  const double decay = std::exp(-0.5 * gamma * dt);
  const double disc = stiffness - 0.25 * gamma * gamma;
  // c = "cos" part, s = "sin(w t)/w" part of the damped solution
  double c = 1.0;
  double s = dt;
  if (disc > 0.0) {
    const double w = std::sqrt(disc);
    c = std::cos(w * dt);
    s = std::sin(w * dt) / w;
  } else if (disc < 0.0) {
    const double w = std::sqrt(-disc);
    c = std::cosh(w * dt);
    s = std::sinh(w * dt) / w;
  }
  yy_ = decay * (c + 0.5 * gamma * s);
  yv_ = decay * s;
  vy_ = -decay * stiffness * s;
  vv_ = decay * (c - 0.5 * gamma * s);
}

LatticeState step_lattice(LatticeState state, std::span<const double> drive, double dt,
                          double gamma, double omega) {
  if (!(dt > 0.0)) throw std::domain_error("time step must be positive");
  if (drive.size() != state.z.size() || state.v.size() != state.z.size())
    throw std::invalid_argument("lattice state and drive lengths differ");
  const OscillatorFlow flow(omega * omega, gamma, dt);
  for (std::size_t j = 0; j < state.z.size(); ++j) flow.advance(state.z[j], state.v[j], drive[j]);
  return state;
}

double elastic_energy(std::span<const double> z, double rigidity, double omega,
                      double mirror_size) {
  const double c = rigidity * omega / mirror_size;
  double e = 0.0;
  for (std::size_t j = 0; j + 1 < z.size(); ++j) {
    const double dz = z[j + 1] - z[j];
    e += dz * dz;
  }
  return 0.5 * c * c * e;
}

double mechanical_energy(const LatticeState& state, double rigidity, double omega,
                         double mirror_size) {
  double e = 0.0;
  for (int j = 0; j < state.size(); ++j)
    e += 0.5 * (state.v[j] * state.v[j] + omega * omega * state.z[j] * state.z[j]);
  return e + elastic_energy(state.z, rigidity, omega, mirror_size);
}

CoupledLatticeFlow::CoupledLatticeFlow(int mirrors, double rigidity, double omega,
                                       double mirror_size, double gamma, double dt)
    : n_(mirrors), dt_(dt) {
  if (mirrors < 1) throw std::domain_error("need at least one mirror");
  if (!(dt > 0.0)) throw std::domain_error("time step must be positive");
  const double om2 = omega * omega;
  const double c = om2 * (rigidity / mirror_size) * (rigidity / mirror_size);

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n_, n_);
  for (int j = 0; j < n_; ++j) {
    k(j, j) = om2;
    if (j > 0) {
      k(j, j) += c;
      k(j, j - 1) = -c;
    }
    if (j + 1 < n_) {
      k(j, j) += c;
      k(j, j + 1) = -c;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  if (es.info() != Eigen::Success) throw std::runtime_error("lattice eigendecomposition failed");
  modes_ = es.eigenvectors();
  stiffness_ = es.eigenvalues();
  flows_.reserve(n_);
  for (int i = 0; i < n_; ++i) flows_.emplace_back(stiffness_[i], gamma, dt);
  zm_.resize(n_);
  vm_.resize(n_);
  rm_.resize(n_);
}

void CoupledLatticeFlow::advance(LatticeState& state, std::span<const double> radiation) const {
  Eigen::Map<Eigen::VectorXd> z(state.z.data(), n_);
  Eigen::Map<Eigen::VectorXd> v(state.v.data(), n_);
  Eigen::Map<const Eigen::VectorXd> r(radiation.data(), n_);
  zm_.noalias() = modes_.transpose() * z;
  vm_.noalias() = modes_.transpose() * v;
  rm_.noalias() = modes_.transpose() * r;
  for (int i = 0; i < n_; ++i) flows_[i].advance(zm_[i], vm_[i], rm_[i]);
  z.noalias() = modes_ * zm_;
  v.noalias() = modes_ * vm_;
}

void expand_to_grid(std::span<const double> z, int points_per_mirror, std::span<double> out) {
  for (std::size_t j = 0; j < z.size(); ++j)
    for (int l = 0; l < points_per_mirror; ++l) out[j * points_per_mirror + l] = z[j];
}

std::vector<double> expand_to_grid(std::span<const double> z, int points_per_mirror) {
  std::vector<double> out(z.size() * points_per_mirror);
  expand_to_grid(z, points_per_mirror, out);
  return out;
}

}  // namespace omps
