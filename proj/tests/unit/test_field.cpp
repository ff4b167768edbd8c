#include <cmath>
#include <random>

#include "doctest.h"
#include "omps/field_solver.hpp"
#include "omps/stats.hpp"

using namespace omps;

namespace {

NormalizedParams reference_params(int mirrors, int m, double halfwidth) {
  NormalizedParams p;
  p.gamma = 0.1;
  p.omega = 10.0;
  p.detuning = -2.2;
  p.rigidity = 1.13;
  p.mirrors = mirrors;
  p.points_per_mirror = m;
  p.halfwidth = halfwidth;
  return p;
}

PumpSchedule flat_pump(double e0) {
  PumpSchedule s;
  s.base.amplitude = e0;
  return s;
}

std::vector<cplx> random_field(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<cplx> f(n);
  for (auto& c : f) c = {nd(rng), nd(rng)};
  return f;
}

}  // namespace

TEST_CASE("grid layout") {
  const auto g = Grid1D::uniform(220, 40.0);
  CHECK(g.dx * g.n == doctest::Approx(80.0).epsilon(1e-15));
  CHECK(g.x.front() == doctest::Approx(-40.0 + 0.5 * g.dx));
  CHECK(g.x.back() == doctest::Approx(40.0 - 0.5 * g.dx));
  CHECK(g.k[0] == 0.0);
  CHECK(g.k[1] == doctest::Approx(2.0 * M_PI / 80.0));
  CHECK(g.k[g.n - 1] == doctest::Approx(-2.0 * M_PI / 80.0));
}

TEST_CASE("spectral Laplacian of an on-grid plane wave") {
  const auto g = Grid1D::uniform(128, 10.0);
  Fft fft(g.n);
  for (int m : {1, 5, 17, -9}) {
    const double k0 = m * 2.0 * M_PI / 20.0;
    std::vector<cplx> f(g.n), orig(g.n);
    for (int i = 0; i < g.n; ++i) orig[i] = f[i] = std::polar(1.0, k0 * g.x[i]);
    fft.forward(f);
    for (int i = 0; i < g.n; ++i) f[i] *= -g.k[i] * g.k[i];
    fft.backward(f);
    for (int i = 0; i < g.n; ++i) CHECK(std::abs(f[i] + k0 * k0 * orig[i]) < 1e-10);
  }
}

TEST_CASE("linear flow") {
  const auto g = Grid1D::uniform(64, 8.0);
  const double k0 = 3 * 2.0 * M_PI / 16.0;
  LinearPropagator lin(g, k0 * k0);
  std::vector<cplx> f(g.n), orig(g.n);
  for (int i = 0; i < g.n; ++i) orig[i] = f[i] = std::polar(1.0, k0 * g.x[i]);
  lin.apply(f, 0.37);
  for (int i = 0; i < g.n; ++i) CHECK(std::abs(f[i] - std::exp(-0.37) * orig[i]) < 1e-13);

  LinearPropagator flat(g, 0.0);
  std::vector<cplx> u(g.n, cplx(0.4, -0.2));
  flat.apply(u, 1.5);
  for (const auto& c : u) CHECK(std::abs(c - std::exp(-1.5) * cplx(0.4, -0.2)) < 1e-14);

  LinearPropagator l2(g, -2.2);
  auto a = random_field(g.n, 5);
  auto b = a;
  l2.apply(a, 0.05);
  l2.apply(a, 0.05);
  l2.apply(b, 0.1);
  for (int i = 0; i < g.n; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("nonlinear flow") {
  std::vector<cplx> f{cplx(0.3, 0.1), cplx(-1.0, 2.0)};
  const std::vector<double> zero{0.0, 0.0};
  const std::vector<cplx> E{cplx(1.0, 0.0), cplx(0.5, -0.5)};
  auto g = f;
  nonlinear_step(g, zero, E, 0.2);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(g[i] - (f[i] + 0.2 * E[i])) < 1e-15);

  const std::vector<double> Z{0.7, -3.0};
  const std::vector<cplx> dark{0.0, 0.0};
  g = f;
  nonlinear_step(g, Z, dark, 0.4);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(std::abs(g[i]) - std::abs(f[i])) < 1e-15);
    CHECK(std::abs(g[i] - f[i] * std::polar(1.0, Z[i] * 0.4)) < 1e-15);
  }

  // reference: RK4 with a tiny step on dF/dt = i F + 1
  std::vector<cplx> one{0.0};
  nonlinear_step(one, std::vector<double>{1.0}, std::vector<cplx>{1.0}, 0.1);
  cplx y = 0.0;
  const double h = 1e-4;
  auto rhs = [](cplx v) { return cplx(0.0, 1.0) * v + 1.0; };
  for (int s = 0; s < 1000; ++s) {
    const cplx k1 = rhs(y), k2 = rhs(y + 0.5 * h * k1), k3 = rhs(y + 0.5 * h * k2),
               k4 = rhs(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK(std::abs(one[0] - (std::polar(1.0, 0.1) - 1.0) / cplx(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(one[0] - y) < 1e-12);
}

TEST_CASE("pump construction") {
  const auto g = Grid1D::uniform(160, 40.0);
  PumpSchedule s;
  s.base.amplitude = 1.5;
  s.base.width = 40.0;
  CHECK(s.base.at(0.0) == 1.5);
  CHECK(s.base.at(40.0) == doctest::Approx(1.5 * std::exp(-0.5)).epsilon(1e-14));
  CHECK(s.base.at(-40.0) == doctest::Approx(1.5 * std::exp(-0.5)).epsilon(1e-14));

  AddressBeam b;
  b.id = "w";
  b.amplitude = 0.8;
  b.center = 12.0;
  b.width = 2.0;
  b.start = 10.0;
  b.stop = 20.0;
  s.beams.push_back(b);
  const auto off = build_pump(s, g, 9.999);
  const auto on = build_pump(s, g, 10.0);
  const auto after = build_pump(s, g, 20.0);
  for (int i = 0; i < g.n; ++i) {
    CHECK(off[i] == after[i]);
    const double d = g.x[i] - 12.0;
    CHECK(std::abs(on[i] - off[i] - 0.8 * std::exp(-d * d / 8.0)) < 1e-15);
  }

  PumpSchedule fig3;
  fig3.base.amplitude = std::sqrt(1.5);
  fig3.base.width = 23.0;
  fig3.beams.push_back(b);
  CHECK(fig3.base.at(0.0) == doctest::Approx(std::sqrt(1.5)));

  PumpSchedule bad = s;
  bad.base.exponent = 3;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = s;
  bad.beams[0].stop = bad.beams[0].start;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = s;
  bad.base.width = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("lower homogeneous branch is a fixed point up to the splitting error") {
  const auto p = reference_params(8, 4, 16.0);
  const double e2 = 2.25;
  const double I = hss_intensities(p.detuning, e2).front();
  const auto h = hss_field(I, p.detuning, std::sqrt(e2));
  auto deviation = [&](double dt) {
    LatticeSimulator sim(p, flat_pump(std::sqrt(e2)), dt);
    sim.set_uniform(h.field, h.displacement);
    const long n = std::lround(10.0 / dt);
    for (long s = 0; s < n; ++s) sim.step();
    double d = 0.0;
    for (const auto& f : sim.field()) d = std::max(d, std::abs(f - h.field));
    for (double z : sim.lattice().z) d = std::max(d, std::abs(z - I));
    return d;
  };
  const double coarse = deviation(2e-3);
  const double fine = deviation(1e-3);
  CHECK(coarse < 1e-5);
  CHECK(coarse / fine > 3.5);
  CHECK(coarse / fine < 4.5);
}

TEST_CASE("empty cavity decays at the cavity rate") {
  auto p = reference_params(4, 4, 8.0);
  LatticeSimulator sim(p, flat_pump(0.0));
  const cplx f0(1e-3, 2e-3);
  sim.set_uniform(f0, 0.0);
  for (int s = 0; s < 2000; ++s) sim.step();
  for (const auto& f : sim.field())
    CHECK(std::abs(f) == doctest::Approx(std::abs(f0) * std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("step validation and divergence") {
  const auto p = reference_params(4, 4, 8.0);
  CHECK_THROWS_AS(LatticeSimulator(p, flat_pump(1.0), 0.011), std::domain_error);
  CHECK_NOTHROW(LatticeSimulator(p, flat_pump(1.0), 0.01));
  CHECK_THROWS_AS(LatticeSimulator(p, flat_pump(1.0), 0.0), std::domain_error);

  LatticeSimulator sim(p, flat_pump(1.0));
  sim.set_uniform(0.0, 0.0);
  std::vector<cplx> f(sim.grid().n, 0.0);
  f[5] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
  sim.set_field(f);
  try {
    sim.step();
    FAIL("expected divergence");
  } catch (const DivergedError& e) {
    CHECK(e.index() < static_cast<std::size_t>(sim.grid().n));
  }
}

TEST_CASE("gauge shift of detuning against displacement leaves the field modulus unchanged") {
  const auto g = Grid1D::uniform(64, 8.0);
  const double delta = 0.9;
  LinearPropagator a(g, -2.2), b(g, -2.2 + delta);
  auto fa = random_field(g.n, 9);
  auto fb = fa;
  std::vector<double> Za(g.n), Zb(g.n);
  for (int i = 0; i < g.n; ++i) {
    Za[i] = 1.0 + 0.5 * std::sin(g.x[i]);
    Zb[i] = Za[i] - delta;
  }
  const std::vector<cplx> dark(g.n, 0.0);
  for (int s = 0; s < 50; ++s) {
    a.apply(fa, 0.01);
    nonlinear_step(fa, Za, dark, 0.02);
    a.apply(fa, 0.01);
    b.apply(fb, 0.01);
    nonlinear_step(fb, Zb, dark, 0.02);
    b.apply(fb, 0.01);
  }
  for (int i = 0; i < g.n; ++i) CHECK(std::abs(std::abs(fa[i]) - std::abs(fb[i])) < 1e-12);
}

TEST_CASE("beam schedule management") {
  const auto p = reference_params(4, 4, 8.0);
  LatticeSimulator sim(p, flat_pump(1.0));
  sim.initialize(1);
  AddressBeam b;
  b.id = "a";
  b.amplitude = 0.5;
  b.start = 0.0;
  b.stop = 1.0;
  sim.add_beam(b);
  CHECK_THROWS_AS(sim.add_beam(b), std::invalid_argument);
  CHECK(sim.remove_beam("a"));
  CHECK_FALSE(sim.remove_beam("a"));
}

TEST_CASE("identical seeds give identical runs") {
  const auto p = reference_params(10, 5, 20.0);
  PumpSchedule s;
  s.base.amplitude = 1.5;
  s.base.width = 10.0;
  auto run = [&](std::uint64_t seed) {
    LatticeSimulator sim(p, s);
    sim.initialize(seed);
    SimulateOptions o;
    o.tau_end = 5.0;
    return simulate(sim, o).snapshots;
  };
  const auto a = run(42), b = run(42), c = run(43);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK_FALSE(a.back() == c.back());
}

TEST_CASE("dark pump relaxes to the zero state and is flagged steady") {
  const auto p = reference_params(4, 4, 8.0);
  LatticeSimulator sim(p, flat_pump(0.0));
  sim.initialize(3);
  SimulateOptions o;
  o.tau_end = 300.0;
  o.keep_snapshots = false;
  o.stop_when_steady = true;
  const auto r = simulate(sim, o);
  CHECK(r.steady);
  for (double I : r.final_state.intensity()) CHECK(I < 1e-12);
}

TEST_CASE("split step is second order in dt") {
  const auto p = reference_params(8, 6, 16.0);
  PumpSchedule s;
  s.base.amplitude = 1.5;
  s.base.width = 12.0;
  AddressBeam b;
  b.id = "w";
  b.amplitude = 1.0;
  b.width = 1.5;
  b.start = 0.0;
  b.stop = 10.0;
  s.beams.push_back(b);
  auto final_state = [&](double dt) {
    LatticeSimulator sim(p, s, dt);
    sim.initialize(5);
    const long n = std::lround(1.0 / dt);
    for (long i = 0; i < n; ++i) sim.step();
    auto I = sim.intensity();
    auto Z = sim.displacement_field();
    I.insert(I.end(), Z.begin(), Z.end());
    return I;
  };
  const std::vector<double> dts{0.01, 0.005, 0.0025};
  const auto ref = final_state(dts.back() / 16.0);
  std::vector<double> errs;
  for (double dt : dts) {
    const auto v = final_state(dt);
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e = std::max(e, std::abs(v[i] - ref[i]));
    errs.push_back(e);
  }
  const double slope = loglog_slope(dts, errs);
  CHECK(slope > 1.7);
  CHECK(slope < 2.3);
}
