#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "omps/analysis.hpp"
#include "omps/batch.hpp"
#include "omps/config.hpp"
#include "omps/continuum.hpp"
#include "omps/roundtrip.hpp"
#include "omps/server.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

struct CommonFlags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> dt;
  std::optional<double> tau_end;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Configuration file")->check(CLI::ExistingFile);
    app->add_option("--preset", preset, "Built-in preset")
        ->check(CLI::IsMember(omps::preset_names()));
    app->add_option("--seed", seed, "Noise seed");
    app->add_option("--out", out, "Output directory");
    app->add_option("--dt", dt, "Time step");
    app->add_option("--tau-end", tau_end, "Final time");
  }

  omps::RunConfig resolve(const std::string& fallback_preset) const {
    if (!config.empty() && !preset.empty())
      throw std::invalid_argument("give either --config or --preset");
    omps::RunConfig c;
    if (!config.empty())
      c = omps::load_config(config);
    else if (!preset.empty())
      c = omps::preset(preset);
    else if (!fallback_preset.empty())
      c = omps::preset(fallback_preset);
    else
      throw std::invalid_argument("one of --config or --preset is required");
    if (seed) c.integrator.seed = *seed;
    if (!out.empty()) c.output.dir = out;
    if (dt) c.integrator.dt = *dt;
    if (tau_end) c.integrator.tau_end = *tau_end;
    c.validate();
    return c;
  }
};

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(std::stoi(p));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Micromirror-array cavity simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_mode;
  bool run_gnuplot = false;
  auto* run = app.add_subcommand("run", "Run one configuration");
  run_flags.attach(run);
  run->add_option("--mode", run_mode, "lattice or continuum")
      ->check(CLI::IsMember({"lattice", "continuum", "oracle"}));
  run->add_flag("--gnuplot", run_gnuplot, "Also write a gnuplot script");

  CommonFlags sweep_flags;
  std::vector<std::string> axes;
  auto* sweep = app.add_subcommand("sweep", "Sweep N, E0sq, delta or rho");
  sweep_flags.attach(sweep);
  sweep->add_option("--axis", axes, "NAME=v1,v2,... or NAME=start:stop:count");

  CommonFlags oracle_flags;
  auto* oracle = app.add_subcommand("oracle-check", "Round-trip map against the mean-field model");
  oracle_flags.attach(oracle);

  CommonFlags stab_flags;
  double k_max = 3.0;
  int k_samples = 301;
  std::string curve;
  auto* stab = app.add_subcommand("stability", "Homogeneous states and their growth rates");
  stab_flags.attach(stab);
  stab->add_option("--k-max", k_max, "Largest wavenumber");
  stab->add_option("--samples", k_samples, "Wavenumber samples");
  stab->add_option("--curve", curve, "Bistability curve over E0sq MIN:MAX:COUNT");

  CommonFlags conv_flags;
  std::string mirrors = "20,40,80";
  int points = omps::kDefaultContinuumPoints;
  auto* conv = app.add_subcommand("convergence", "Lattice against continuum steady states");
  conv_flags.attach(conv);
  conv->add_option("--mirrors", mirrors, "Comma-separated mirror counts");
  conv->add_option("--points", points, "Continuum grid points");

  std::string bind = "127.0.0.1:8765";
  int max_sessions = 4;
  auto* serve = app.add_subcommand("serve", "Interactive steering service");
  serve->add_option("--bind", bind, "HOST:PORT");
  serve->add_option("--max-sessions", max_sessions, "Concurrent sessions")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto c = run_flags.resolve("");
      if (run_mode == "lattice") c.mode = omps::RunMode::lattice;
      if (run_mode == "continuum") c.mode = omps::RunMode::continuum;
      if (run_mode == "oracle") c.mode = omps::RunMode::oracle;
      if (run_gnuplot) c.output.gnuplot = true;
      const auto o = omps::run(c);
      if (c.mode == omps::RunMode::oracle) {
        std::cout << "wrote " << c.output.dir << "/fixed_point.csv and residual.csv\n";
      } else {
        std::cout << "tau: " << o.tau << "\nsteady: " << (o.steady ? "yes" : "no") << "\n"
                  << omps::report_text(o.report);
        if (o.persistence) std::cout << omps::persistence_text(*o.persistence);
      }
      if (o.diverged) std::cerr << "diverged: " << o.message << "\n";
      return o.exit_status();
    }
    if (*sweep) {
      const auto c = sweep_flags.resolve("");
      std::vector<omps::SweepAxis> parsed;
      for (const auto& a : axes) parsed.push_back(omps::parse_axis(a));
      const auto r = omps::sweep(c, parsed);
      std::cout << omps::sweep_csv(parsed, r);
      return 0;
    }
    if (*oracle) {
      const auto c = oracle_flags.resolve("fig2-soliton");
      const double pump_sq = c.pump.base.amplitude * c.pump.base.amplitude;
      const std::vector<double> Ts{0.1, 0.03, 0.01};
      std::vector<omps::FixedPointRow> fixed;
      for (double T : Ts) fixed.push_back(omps::fixed_point_vs_hss(T, c.params.detuning, pump_sq));
      omps::DynamicsOptions d;
      d.gamma = c.params.gamma;
      d.omega = c.params.omega;
      d.detuning = c.params.detuning;
      d.pump_sq = pump_sq;
      const auto res = omps::meanfield_residual(Ts, d);
      std::cout << omps::fixed_point_csv(fixed) << "\n" << omps::residual_csv(res);
      return 0;
    }
    if (*stab) {
      const auto c = stab_flags.resolve("fig2-soliton");
      if (!curve.empty()) {
        const auto ax = omps::parse_axis("E0sq=" + curve);
        const auto rows = omps::bistability_curve(c.params, ax.values.front(), ax.values.back(),
                                                  static_cast<int>(ax.values.size()));
        std::cout << omps::bistability_csv(rows);
        return 0;
      }
      const double E0 = c.pump.base.amplitude;
      std::cout << "branch,intensity,k,growth_rate\n";
      const auto roots = omps::hss_intensities(c.params.detuning, E0 * E0);
      for (std::size_t b = 0; b < roots.size(); ++b) {
        const auto hs = omps::hss_field(roots[b], c.params.detuning, E0);
        for (const auto& s : omps::stability_scan(hs, c.params, k_max, k_samples))
          std::printf("%zu,%.17g,%.17g,%.17g\n", b, roots[b], s.wavenumber, s.growth_rate);
      }
      return 0;
    }
    if (*conv) {
      const auto c = conv_flags.resolve("fig2-soliton");
      omps::ConvergenceOptions o;
      o.tau_end = c.integrator.tau_end;
      o.dt = c.integrator.dt;
      o.seed = c.integrator.seed;
      o.noise = c.integrator.noise;
      o.continuum_points = points;
      const auto t = omps::discrete_vs_continuum(c.params, c.pump, parse_ints(mirrors), o);
      std::cout << "N,mirror_size,intensity_distance,displacement_distance,distance,steady,diverged\n";
      for (const auto& r : t.rows)
        std::printf("%d,%.17g,%.17g,%.17g,%.17g,%d,%d\n", r.mirrors, r.mirror_size,
                    r.intensity_distance, r.displacement_distance, r.distance, r.steady ? 1 : 0,
                    r.diverged ? 1 : 0);
      return 0;
    }
    if (*serve) {
      omps::ServerOptions opts;
      omps::parse_bind(bind, opts);
      opts.max_sessions = max_sessions;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      omps::serve(opts, g_stop, [](std::uint16_t port, void*) {
        std::cerr << "listening on port " << port << "\n";
      });
      return 0;
    }
  } catch (const omps::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
