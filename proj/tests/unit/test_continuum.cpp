#include <cmath>

#include "doctest.h"
#include "omps/continuum.hpp"

using namespace omps;

namespace {

NormalizedParams base_params() {
  NormalizedParams p;
  p.gamma = 0.1;
  p.omega = 10.0;
  p.detuning = -2.2;
  p.rigidity = 1.13;
  p.mirrors = 8;
  p.points_per_mirror = 4;
  p.halfwidth = 16.0;
  return p;
}

PumpSchedule flat_pump(double e0) {
  PumpSchedule s;
  s.base.amplitude = e0;
  return s;
}

}  // namespace

TEST_CASE("uniform evolution matches the lattice solver") {
  const auto p = base_params();
  LatticeSimulator lat(p, flat_pump(1.5));
  ContinuumSimulator con(p, 64, flat_pump(1.5));
  lat.set_uniform(cplx(0.1, 0.2), 0.3);
  con.set_uniform(cplx(0.1, 0.2), 0.3);
  for (int s = 0; s < 5000; ++s) {
    lat.step();
    con.step();
  }
  const auto fl = lat.field();
  const auto fc = con.field();
  for (const auto& f : fc) CHECK(std::abs(f - fl[0]) < 1e-9);
  for (double z : con.Z()) CHECK(std::abs(z - lat.lattice().z[0]) < 1e-9);
}

TEST_CASE("free mechanical modes follow the continuum dispersion") {
  const auto p = base_params();
  ContinuumSimulator con(p, 64, flat_pump(0.0));
  CHECK(con.mode_stiffness(0.0) == doctest::Approx(100.0));
  CHECK(con.mode_stiffness(0.5) == doctest::Approx(100.0 * (1.0 + 1.13 * 1.13 * 0.25)));

  const double k0 = 3 * 2.0 * M_PI / 32.0;
  std::vector<double> Z(64), W(64, 0.0);
  for (int i = 0; i < 64; ++i) Z[i] = 1e-3 * std::cos(k0 * con.grid().x[i]);
  con.set_uniform(0.0, 0.0);
  con.set_mechanics(Z, W);
  for (int s = 0; s < 1000; ++s) con.step();

  double z = 1e-3, v = 0.0;
  OscillatorFlow(100.0 * (1.0 + 1.13 * 1.13 * k0 * k0), 0.1, 1.0).advance(z, v, 0.0);
  for (int i = 0; i < 64; ++i)
    CHECK(std::abs(con.Z()[i] - z / 1e-3 * Z[i]) < 1e-12);
}

TEST_CASE("interval means of band-limited data are exact") {
  const auto g = Grid1D::uniform(128, 10.0);
  const double k0 = 5 * 2.0 * M_PI / 20.0;
  std::vector<double> f(g.n);
  for (int i = 0; i < g.n; ++i) f[i] = 2.0 + std::sin(k0 * g.x[i]) + 0.5 * std::cos(2 * k0 * g.x[i]);
  const std::vector<double> edges{-10.0, -3.3, 0.1, 7.9};
  const auto m = interval_means(g, f, edges);
  REQUIRE(m.size() == 3);
  auto prim = [&](double x) {
    return 2.0 * x - std::cos(k0 * x) / k0 + 0.25 * std::sin(2 * k0 * x) / k0;
  };
  for (int e = 0; e < 3; ++e)
    CHECK(m[e] == doctest::Approx((prim(edges[e + 1]) - prim(edges[e])) /
                                  (edges[e + 1] - edges[e])).epsilon(1e-12));
}

TEST_CASE("identical uniform states are at zero distance") {
  const auto p = base_params();
  LatticeSimulator lat(p, flat_pump(1.5));
  ContinuumSimulator con(p, 256, flat_pump(1.5));
  lat.set_uniform(cplx(0.4, -0.1), 0.17);
  con.set_uniform(cplx(0.4, -0.1), 0.17);
  const auto row = compare_to_continuum(lat.snapshot(), con.snapshot(), p.halfwidth);
  CHECK(row.mirrors == 8);
  CHECK(row.mirror_size == doctest::Approx(4.0));
  CHECK(row.distance < 1e-12);
}

TEST_CASE("continuum grid size must be positive") {
  const auto p = base_params();
  CHECK_THROWS(ContinuumSimulator(p, 0, flat_pump(1.0)));
}
