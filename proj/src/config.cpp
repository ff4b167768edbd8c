#include "omps/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace omps {

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::lattice: return "lattice";
    case RunMode::continuum: return "continuum";
    case RunMode::oracle: return "oracle";
  }
  return "lattice";
}

void RunConfig::validate() const {
  params.validate();
  pump.validate();
  if (!(integrator.dt > 0.0)) throw std::domain_error("dt must be positive");
  if (integrator.dt > max_time_step(params.omega) * (1.0 + 1e-12))
    throw std::domain_error("dt exceeds 0.1/omega");
  if (!(integrator.tau_end > 0.0)) throw std::domain_error("tau_end must be positive");
  if (!(integrator.snapshot_interval > 0.0))
    throw std::domain_error("snapshot_interval must be positive");
  if (!(integrator.steady_tol > 0.0)) throw std::domain_error("steady_tol must be positive");
  if (integrator.steady_consecutive < 1)
    throw std::domain_error("steady_consecutive must be at least 1");
  if (!(integrator.noise >= 0.0)) throw std::domain_error("noise must be nonnegative");
  if (continuum_points < 2) throw std::domain_error("continuum_points must be at least 2");
  for (std::size_t i = 0; i < pump.beams.size(); ++i)
    for (std::size_t j = i + 1; j < pump.beams.size(); ++j)
      if (pump.beams[i].id == pump.beams[j].id)
        throw std::domain_error("duplicate beam id '" + pump.beams[i].id + "'");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct LineContext {
  const std::string& source;
  int line;
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(source, line, msg); }
};

double to_double(const std::string& v, const LineContext& ctx) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) ctx.fail("expected a number, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& v, const LineContext& ctx) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) ctx.fail("expected an unsigned integer, got '" + v + "'");
  return out;
}

int to_int(const std::string& v, const LineContext& ctx) {
  int out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) ctx.fail("expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v, const LineContext& ctx) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  ctx.fail("expected a boolean, got '" + v + "'");
}

struct BeamDraft {
  AddressBeam beam;
  double magnitude = 1.0;
  double phase = 0.0;
  double duration = -1.0;
  bool has_stop = false;
  int line = 0;
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig c;
  std::map<std::string, BeamDraft> beams;
  std::vector<std::string> beam_order;
  std::string section;
  bool pump_set = false;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const LineContext ctx{source, lineno};
    const auto cut = raw.find_first_of("#;");
    const std::string line = trim(std::string_view(raw).substr(0, cut));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') ctx.fail("unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.rfind("beam.", 0) == 0) {
        const std::string id = section.substr(5);
        if (id.empty()) ctx.fail("beam section needs an id");
        if (beams.count(id)) ctx.fail("duplicate beam id '" + id + "'");
        beams[id].beam.id = id;
        beams[id].line = lineno;
        beam_order.push_back(id);
      } else if (section != "model" && section != "pump" && section != "integrator" &&
                 section != "output" && section != "run") {
        ctx.fail("unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) ctx.fail("expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string val = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) ctx.fail("missing key");
    if (section.empty()) ctx.fail("key '" + key + "' outside of any section");
    auto unknown = [&] { ctx.fail("unknown key '" + key + "' in [" + section + "]"); };

    if (section == "model") {
      auto& p = c.params;
      if (key == "gamma") p.gamma = to_double(val, ctx);
      else if (key == "omega") p.omega = to_double(val, ctx);
      else if (key == "detuning") p.detuning = to_double(val, ctx);
      else if (key == "rigidity") p.rigidity = to_double(val, ctx);
      else if (key == "mirrors") p.mirrors = to_int(val, ctx);
      else if (key == "points_per_mirror") p.points_per_mirror = to_int(val, ctx);
      else if (key == "halfwidth") p.halfwidth = to_double(val, ctx);
      else unknown();
    } else if (section == "pump") {
      auto& b = c.pump.base;
      if (key == "E0" || key == "E0sq") {
        if (pump_set) ctx.fail("pump amplitude given twice");
        pump_set = true;
        const double v = to_double(val, ctx);
        if (key == "E0sq" && v < 0.0) ctx.fail("E0sq must be nonnegative");
        b.amplitude = key == "E0" ? v : std::sqrt(v);
      } else if (key == "width") {
        b.width = to_double(val, ctx);
      } else if (key == "exponent") {
        b.exponent = to_int(val, ctx);
      } else {
        unknown();
      }
    } else if (section.rfind("beam.", 0) == 0) {
      auto& d = beams[section.substr(5)];
      if (key == "amplitude") d.magnitude = to_double(val, ctx);
      else if (key == "phase") d.phase = to_double(val, ctx);
      else if (key == "center") d.beam.center = to_double(val, ctx);
      else if (key == "width") d.beam.width = to_double(val, ctx);
      else if (key == "start") d.beam.start = to_double(val, ctx);
      else if (key == "stop") {
        if (d.duration >= 0.0) ctx.fail("give either stop or duration, not both");
        d.beam.stop = to_double(val, ctx);
        d.has_stop = true;
      } else if (key == "duration") {
        if (d.has_stop) ctx.fail("give either stop or duration, not both");
        d.duration = to_double(val, ctx);
        if (!(d.duration > 0.0)) ctx.fail("duration must be positive");
      } else {
        unknown();
      }
    } else if (section == "integrator") {
      auto& g = c.integrator;
      if (key == "dt") g.dt = to_double(val, ctx);
      else if (key == "tau_end") g.tau_end = to_double(val, ctx);
      else if (key == "seed") g.seed = to_u64(val, ctx);
      else if (key == "snapshot_interval") g.snapshot_interval = to_double(val, ctx);
      else if (key == "steady_tol") g.steady_tol = to_double(val, ctx);
      else if (key == "steady_consecutive") g.steady_consecutive = to_int(val, ctx);
      else if (key == "noise") g.noise = to_double(val, ctx);
      else if (key == "stop_when_steady") g.stop_when_steady = to_bool(val, ctx);
      else unknown();
    } else if (section == "output") {
      auto& o = c.output;
      if (key == "dir") o.dir = val;
      else if (key == "snapshots") o.snapshots = to_bool(val, ctx);
      else if (key == "csv") o.csv = to_bool(val, ctx);
      else if (key == "gnuplot") o.gnuplot = to_bool(val, ctx);
      else unknown();
    } else if (section == "run") {
      if (key == "name") {
        c.name = val;
      } else if (key == "mode") {
        if (val == "lattice") c.mode = RunMode::lattice;
        else if (val == "continuum") c.mode = RunMode::continuum;
        else if (val == "oracle") c.mode = RunMode::oracle;
        else ctx.fail("unknown mode '" + val + "'");
      } else if (key == "continuum_points") {
        c.continuum_points = to_int(val, ctx);
      } else {
        unknown();
      }
    }
  }

  for (const auto& id : beam_order) {
    auto d = beams[id];
    if (d.duration >= 0.0) d.beam.stop = d.beam.start + d.duration;
    if (!(d.beam.start < d.beam.stop))
      throw ConfigError(source, d.line, "beam '" + id + "' must switch on before it switches off");
    d.beam.amplitude = std::polar(d.magnitude, d.phase);
    c.pump.beams.push_back(d.beam);
  }
  try {
    c.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(source, lineno, e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[run]\nname = " << c.name << "\nmode = " << to_string(c.mode)
     << "\ncontinuum_points = " << c.continuum_points << "\n\n";
  const auto& p = c.params;
  os << "[model]\ngamma = " << num(p.gamma) << "\nomega = " << num(p.omega)
     << "\ndetuning = " << num(p.detuning) << "\nrigidity = " << num(p.rigidity)
     << "\nmirrors = " << p.mirrors << "\npoints_per_mirror = " << p.points_per_mirror
     << "\nhalfwidth = " << num(p.halfwidth) << "\n\n";
  os << "[pump]\nE0 = " << num(c.pump.base.amplitude) << "\nwidth = " << num(c.pump.base.width)
     << "\nexponent = " << c.pump.base.exponent << "\n\n";
  for (const auto& b : c.pump.beams) {
    os << "[beam." << b.id << "]\namplitude = " << num(std::abs(b.amplitude))
       << "\nphase = " << num(std::arg(b.amplitude)) << "\ncenter = " << num(b.center)
       << "\nwidth = " << num(b.width) << "\nstart = " << num(b.start)
       << "\nstop = " << num(b.stop) << "\n\n";
  }
  const auto& g = c.integrator;
  os << "[integrator]\ndt = " << num(g.dt) << "\ntau_end = " << num(g.tau_end)
     << "\nseed = " << g.seed << "\nsnapshot_interval = " << num(g.snapshot_interval)
     << "\nsteady_tol = " << num(g.steady_tol) << "\nsteady_consecutive = " << g.steady_consecutive
     << "\nnoise = " << num(g.noise)
     << "\nstop_when_steady = " << (g.stop_when_steady ? "true" : "false") << "\n\n";
  const auto& o = c.output;
  os << "[output]\ndir = " << o.dir << "\nsnapshots = " << (o.snapshots ? "true" : "false")
     << "\ncsv = " << (o.csv ? "true" : "false")
     << "\ngnuplot = " << (o.gnuplot ? "true" : "false") << "\n";
  return os.str();
}

namespace {

RunConfig reference_base() {
  RunConfig c;
  c.params.gamma = 0.1;
  c.params.omega = 10.0;
  c.params.detuning = -2.2;
  c.params.rigidity = 1.13;
  c.params.points_per_mirror = 11;
  c.params.halfwidth = 40.0;
  c.pump.base.exponent = 20;
  return c;
}

AddressBeam beam(std::string id, double amplitude, double phase, double center, double width,
                 double start, double stop) {
  AddressBeam b;
  b.id = std::move(id);
  b.amplitude = std::polar(amplitude, phase);
  b.center = center;
  b.width = width;
  b.start = start;
  b.stop = stop;
  return b;
}

// Write at +12, second write at -12, erase the first one with phase pi.
void write_erase_protocol(RunConfig& c, double amplitude, double width) {
  const double pi = std::numbers::pi;
  c.pump.beams = {beam("write1", amplitude, 0.0, 12.0, width, 10.0, 20.0),
                  beam("write2", amplitude, 0.0, -12.0, width, 100.0, 110.0),
                  beam("erase1", amplitude, pi, 12.0, width, 200.0, 210.0)};
  c.integrator.tau_end = 320.0;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig2-soliton", "fig2-pattern", "fig3-write-erase", "write-erase-bistable"};
}

RunConfig preset(const std::string& name) {
  RunConfig c = reference_base();
  c.name = name;
  if (name == "fig2-soliton") {
    c.params.mirrors = 20;
    c.pump.base.amplitude = std::sqrt(2.25);
    c.pump.base.width = 40.0;
    c.pump.beams = {beam("write", 1.0, 0.0, 0.0, 1.5, 0.0, 10.0)};
    c.integrator.tau_end = 300.0;
  } else if (name == "fig2-pattern") {
    c.params.mirrors = 40;
    c.pump.base.amplitude = std::sqrt(2.7);
    c.pump.base.width = 40.0;
    c.integrator.tau_end = 300.0;
  } else if (name == "fig3-write-erase") {
    c.params.mirrors = 7;
    c.pump.base.amplitude = std::sqrt(1.5);
    c.pump.base.width = 23.0;
    write_erase_protocol(c, 1.0, 3.0);
  } else if (name == "write-erase-bistable") {
    c.params.mirrors = 7;
    c.pump.base.amplitude = std::sqrt(2.25);
    c.pump.base.width = 23.0;
    write_erase_protocol(c, 1.0, 3.0);
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  c.validate();
  return c;
}

}  // namespace omps
