#include "omps/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "omps/continuum.hpp"
#include "omps/roundtrip.hpp"

namespace omps {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string gnuplot_script(const std::string& title) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel 'x'\n"
     << "set title '" << title << "'\n"
     << "set multiplot layout 2,1\n"
     << "plot 'final.csv' using 1:2 with lines\n"
     << "plot 'final.csv' using 1:3 with lines\n"
     << "unset multiplot\n";
  return os.str();
}

std::string snapshot_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06zu.omps", i);
  return buf;
}

RunOutcome run_oracle(const RunConfig& c, const fs::path& dir) {
  RunOutcome out;
  const std::vector<double> Ts{0.1, 0.03, 0.01};
  std::vector<FixedPointRow> fixed;
  const double pump_sq = c.pump.base.amplitude * c.pump.base.amplitude;
  for (double T : Ts) fixed.push_back(fixed_point_vs_hss(T, c.params.detuning, pump_sq));
  DynamicsOptions d;
  d.gamma = c.params.gamma;
  d.omega = c.params.omega;
  d.detuning = c.params.detuning;
  d.pump_sq = pump_sq;
  d.dt = std::min(c.integrator.dt, max_time_step(c.params.omega));
  const auto residual = meanfield_residual(Ts, d);
  write_text(dir / "fixed_point.csv", fixed_point_csv(fixed));
  write_text(dir / "residual.csv", residual_csv(residual));
  out.files = {dir / "fixed_point.csv", dir / "residual.csv"};
  for (const auto& r : residual)
    if (r.diverged) {
      out.diverged = true;
      out.message = r.message;
    }
  out.steady = true;
  return out;
}

}  // namespace

std::unique_ptr<Simulator> make_simulator(const RunConfig& c) {
  c.validate();
  std::unique_ptr<Simulator> sim;
  if (c.mode == RunMode::lattice)
    sim = std::make_unique<LatticeSimulator>(c.params, c.pump, c.integrator.dt);
  else if (c.mode == RunMode::continuum)
    sim = std::make_unique<ContinuumSimulator>(c.params, c.continuum_points, c.pump,
                                               c.integrator.dt);
  else
    throw std::invalid_argument("oracle mode has no simulator");
  sim->initialize(c.integrator.seed, c.integrator.noise);
  return sim;
}

RunOutcome run(const RunConfig& c) {
  c.validate();
  const fs::path dir = c.output.dir;
  fs::create_directories(dir);
  write_text(dir / "config.ini", format_config(c));
  if (c.mode == RunMode::oracle) return run_oracle(c, dir);

  RunOutcome out;
  out.files.push_back(dir / "config.ini");
  auto sim = make_simulator(c);

  const fs::path snapdir = dir / "snapshots";
  if (c.output.snapshots) fs::create_directories(snapdir);
  std::size_t count = 0;
  std::vector<Snapshot> series;
  const bool track = !c.pump.beams.empty();

  SimulateOptions so;
  so.tau_end = c.integrator.tau_end;
  so.snapshot_interval = c.integrator.snapshot_interval;
  so.steady.tol = c.integrator.steady_tol;
  so.steady.consecutive = c.integrator.steady_consecutive;
  so.stop_when_steady = c.integrator.stop_when_steady && !track;
  so.keep_snapshots = false;
  so.on_snapshot = [&](const Snapshot& s) {
    if (c.output.snapshots) {
      const fs::path p = snapdir / snapshot_name(count);
      write_snapshot(p, s);
      out.files.push_back(p);
    }
    ++count;
    if (track) series.push_back(s);
  };

  Snapshot last;
  try {
    auto res = simulate(*sim, so);
    out.steady = res.steady;
    last = std::move(res.final_state);
  } catch (const DivergedError& e) {
    out.diverged = true;
    out.message = e.what();
    last = sim->snapshot();
  }
  out.tau = last.tau;

  const double width = c.pump.base.width;
  out.report = classify(last, width, out.steady && !out.diverged);
  if (track) out.persistence = soliton_persistence(series, c.pump);

  if (c.output.csv) {
    write_text(dir / "final.csv", export_csv(last));
    out.files.push_back(dir / "final.csv");
  }
  if (c.output.gnuplot) {
    write_text(dir / "plot.gp", gnuplot_script(c.name));
    out.files.push_back(dir / "plot.gp");
  }
  std::ostringstream rep;
  rep << "name: " << c.name << "\nmode: " << to_string(c.mode) << "\ntau: " << out.tau
      << "\nsteady: " << (out.steady ? "yes" : "no") << "\n";
  if (out.diverged) rep << "diverged: " << out.message << "\n";
  rep << report_text(out.report);
  if (out.persistence) rep << persistence_text(*out.persistence);
  write_text(dir / "report.txt", rep.str());
  out.files.push_back(dir / "report.txt");
  return out;
}

SweepAxis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("axis must be NAME=VALUES");
  SweepAxis a;
  a.name = spec.substr(0, eq);
  if (a.name != "N" && a.name != "E0sq" && a.name != "delta" && a.name != "rho")
    throw std::invalid_argument("unknown sweep axis '" + a.name + "'");
  const std::string vals = spec.substr(eq + 1);
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw std::invalid_argument("bad axis value '" + s + "'");
    return v;
  };
  if (vals.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(vals);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:count");
    const double lo = number(parts[0]), hi = number(parts[1]);
    const int n = static_cast<int>(number(parts[2]));
    if (n < 1) throw std::invalid_argument("range count must be positive");
    for (int i = 0; i < n; ++i) a.values.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  } else {
    std::stringstream ss(vals);
    for (std::string p; std::getline(ss, p, ',');) a.values.push_back(number(p));
  }
  if (a.values.empty()) throw std::invalid_argument("axis '" + a.name + "' has no values");
  return a;
}

void apply_axis(RunConfig& c, const std::string& name, double value) {
  if (name == "N") {
    const double r = std::round(value);
    if (r != value || r < 1) throw std::invalid_argument("N must be a positive integer");
    c.params.mirrors = static_cast<int>(r);
  } else if (name == "E0sq") {
    if (value < 0.0) throw std::invalid_argument("E0sq must be nonnegative");
    c.pump.base.amplitude = std::sqrt(value);
  } else if (name == "delta") {
    c.params.detuning = value;
  } else if (name == "rho") {
    c.params.rigidity = value;
  } else {
    throw std::invalid_argument("unknown sweep axis '" + name + "'");
  }
}

int worker_threads() {
  if (const char* env = std::getenv("OMPS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::string row_line(const SweepRow& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.index;
  for (double v : r.values) os << ',' << v;
  os << ',' << r.cls << ',' << r.contrast << ',' << r.wavenumber << ',' << r.peaks << ','
     << (r.steady ? 1 : 0) << ',' << r.status;
  return os.str();
}

std::optional<SweepRow> parse_row(const std::string& line, std::size_t axes) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  for (std::string p; std::getline(ss, p, ',');) f.push_back(p);
  if (f.size() != axes + 7) return std::nullopt;
  try {
    SweepRow r;
    r.index = std::stoi(f[0]);
    for (std::size_t i = 0; i < axes; ++i) r.values.push_back(std::stod(f[1 + i]));
    r.cls = f[1 + axes];
    r.contrast = std::stod(f[2 + axes]);
    r.wavenumber = std::stod(f[3 + axes]);
    r.peaks = std::stoi(f[4 + axes]);
    r.steady = f[5 + axes] == "1";
    r.status = f[6 + axes];
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

SweepResult sweep(const RunConfig& c, const std::vector<SweepAxis>& axes) {
  SweepResult result;
  if (axes.empty()) {
    const auto o = run(c);
    SweepRow r;
    r.cls = std::string(to_string(o.report.cls));
    r.contrast = o.report.contrast;
    r.wavenumber = o.report.wavenumber.value_or(0.0);
    r.peaks = static_cast<int>(o.report.peaks.size());
    r.steady = o.steady;
    r.status = o.diverged ? "diverged" : "ok";
    result.rows.push_back(r);
    write_text(fs::path(c.output.dir) / "sweep.csv", sweep_csv(axes, result));
    return result;
  }

  std::vector<std::vector<double>> points{{}};
  for (const auto& a : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& p : points)
      for (double v : a.values) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }

  const fs::path dir = c.output.dir;
  fs::create_directories(dir);
  const fs::path manifest = dir / "manifest.txt";
  std::map<int, SweepRow> done;
  {
    std::ifstream in(manifest);
    for (std::string line; std::getline(in, line);)
      if (auto r = parse_row(line, axes.size()); r && r->index >= 0 &&
                                                 r->index < static_cast<int>(points.size()))
        done[r->index] = *r;
  }
  result.resumed = static_cast<int>(done.size());

  std::mutex mu;
  std::ofstream log(manifest, std::ios::app);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      {
        std::lock_guard lock(mu);
        if (done.count(static_cast<int>(i))) continue;
      }
      SweepRow r;
      r.index = static_cast<int>(i);
      r.values = points[i];
      try {
        RunConfig pc = c;
        for (std::size_t a = 0; a < axes.size(); ++a) apply_axis(pc, axes[a].name, points[i][a]);
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu", i);
        pc.output.dir = (dir / name).string();
        const auto o = run(pc);
        r.cls = std::string(to_string(o.report.cls));
        r.contrast = o.report.contrast;
        r.wavenumber = o.report.wavenumber.value_or(0.0);
        r.peaks = static_cast<int>(o.report.peaks.size());
        r.steady = o.steady;
        r.status = o.diverged ? "diverged" : "ok";
      } catch (const std::exception&) {
        r.cls = "none";
        r.status = "error";
      }
      std::lock_guard lock(mu);
      done[r.index] = r;
      log << row_line(r) << '\n' << std::flush;
    }
  };
  const int threads = std::min<int>(worker_threads(), static_cast<int>(points.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (auto& [i, r] : done) result.rows.push_back(r);
  write_text(dir / "sweep.csv", sweep_csv(axes, result));
  return result;
}

std::string sweep_csv(const std::vector<SweepAxis>& axes, const SweepResult& r) {
  std::string out = "index";
  for (const auto& a : axes) out += "," + a.name;
  out += ",class,contrast,wavenumber,peaks,steady,status\n";
  for (const auto& row : r.rows) out += row_line(row) + "\n";
  return out;
}

}  // namespace omps
