#include "omps/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "omps/field_solver.hpp"
#include "omps/grid.hpp"

namespace omps {

std::string_view to_string(PatternClass c) {
  switch (c) {
    case PatternClass::homogeneous: return "homogeneous";
    case PatternClass::periodic: return "periodic";
    case PatternClass::localized: return "localized";
    case PatternClass::mixed: return "mixed";
    case PatternClass::unsteady: return "unsteady";
  }
  return "unknown";
}

namespace {

struct Plateau {
  std::size_t begin = 0, end = 0;  // half-open index range
  bool whole = false;
};

Plateau plateau_of(std::span<const double> x, double pump_width, const ClassifyThresholds& th) {
  Plateau p;
  p.end = x.size();
  if (std::isinf(pump_width)) {
    p.whole = true;
    return p;
  }
  const double lim = th.plateau_fraction * pump_width;
  std::size_t b = 0;
  while (b < x.size() && !(std::abs(x[b]) < lim)) ++b;
  std::size_t e = b;
  while (e < x.size() && std::abs(x[e]) < lim) ++e;
  if (e > b) {
    p.begin = b;
    p.end = e;
  } else {
    p.whole = true;
  }
  return p;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

double grid_spacing(std::span<const double> x) { return x.size() > 1 ? x[1] - x[0] : 1.0; }

// Half-maximum crossing distance walking from `peak` in direction `dir`.
double half_width(std::span<const double> I, std::size_t peak, int dir, double level, double dx) {
  const long n = static_cast<long>(I.size());
  long i = static_cast<long>(peak);
  while (true) {
    const long j = i + dir;
    if (j < 0 || j >= n) return std::abs(static_cast<double>(i - static_cast<long>(peak))) * dx;
    if (I[j] < level) {
      const double frac = (I[i] - level) / (I[i] - I[j]);
      return (std::abs(static_cast<double>(i - static_cast<long>(peak))) + frac) * dx;
    }
    i = j;
  }
}

}  // namespace

double plateau_median(std::span<const double> x, std::span<const double> intensity,
                      double pump_width, const ClassifyThresholds& th) {
  const Plateau pl = plateau_of(x, pump_width, th);
  return median(std::vector<double>(intensity.begin() + pl.begin, intensity.begin() + pl.end));
}

PeakSearch find_peaks(std::span<const double> x, std::span<const double> intensity,
                      double pump_width, const ClassifyThresholds& th) {
  return find_peaks(x, intensity, pump_width, plateau_median(x, intensity, pump_width, th), th);
}

PeakSearch find_peaks(std::span<const double> x, std::span<const double> intensity,
                      double pump_width, double background, const ClassifyThresholds& th) {
  PeakSearch out;
  const Plateau pl = plateau_of(x, pump_width, th);
  out.background = background;
  if (!(out.background > 0.0)) return out;
  const double cut = th.min_contrast * out.background;
  const double dx = grid_spacing(x);

  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = pl.begin; i < pl.end;) {
    if (intensity[i] > cut) {
      std::size_t j = i;
      while (j < pl.end && intensity[j] > cut) ++j;
      runs.emplace_back(i, j);
      i = j;
    } else {
      ++i;
    }
  }
  // A structure straddling the periodic seam is one peak.
  if (pl.whole && runs.size() > 1 && runs.front().first == 0 && runs.back().second == pl.end) {
    runs.front().first = runs.back().first;
    runs.pop_back();
  }

  for (auto [b, e] : runs) {
    std::size_t best = b;
    if (e > b) {
      for (std::size_t i = b; i < e; ++i)
        if (intensity[i] > intensity[best]) best = i;
    } else {
      // wrapped run
      for (std::size_t i = b; i < intensity.size(); ++i)
        if (intensity[i] > intensity[best]) best = i;
      for (std::size_t i = 0; i < e; ++i)
        if (intensity[i] > intensity[best]) best = i;
    }
    Peak p;
    p.position = x[best];
    p.height = intensity[best];
    p.contrast = p.height / out.background;
    const double level = out.background + 0.5 * (p.height - out.background);
    p.fwhm = half_width(intensity, best, -1, level, dx) + half_width(intensity, best, 1, level, dx);
    out.peaks.push_back(p);
  }
  std::sort(out.peaks.begin(), out.peaks.end(),
            [](const Peak& a, const Peak& b) { return a.position < b.position; });
  return out;
}

SpectralLine dominant_line(std::span<const double> x, std::span<const double> intensity,
                           double pump_width, const ClassifyThresholds& th) {
  const Plateau pl = plateau_of(x, pump_width, th);
  const int n = static_cast<int>(x.size());
  const std::size_t len = pl.end - pl.begin;
  SpectralLine line;
  if (len < 4) return line;

  double mean = 0.0;
  for (std::size_t i = pl.begin; i < pl.end; ++i) mean += intensity[i];
  mean /= static_cast<double>(len);

  std::vector<cplx> buf(n, 0.0);
  for (std::size_t i = pl.begin; i < pl.end; ++i) {
    const double t = (static_cast<double>(i - pl.begin) + 0.5) / static_cast<double>(len);
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * t);
    buf[i] = (intensity[i] - mean) * hann;
  }
  Fft(n).forward(buf);

  const int half = n / 2;
  std::vector<double> power(half + 1, 0.0);
  for (int m = 1; m <= half; ++m) {
    power[m] = std::norm(buf[m]);
    if (n - m != m) power[m] += std::norm(buf[n - m]);
  }
  double total = 0.0;
  int best = 1;
  for (int m = 1; m <= half; ++m) {
    total += power[m];
    if (power[m] > power[best]) best = m;
  }
  if (!(total > 0.0)) return line;
  double peak = power[best];
  if (best > 1) peak += power[best - 1];
  if (best < half) peak += power[best + 1];
  line.fraction = peak / total;
  line.wavenumber = 2.0 * std::numbers::pi * best / (n * grid_spacing(x));
  return line;
}

PatternReport classify(std::span<const double> x, std::span<const double> intensity,
                       double pump_width, bool steady, const ClassifyThresholds& th) {
  PatternReport r;
  const Plateau pl = plateau_of(x, pump_width, th);
  double mean = 0.0, sq = 0.0, top = 0.0;
  const double len = static_cast<double>(pl.end - pl.begin);
  for (std::size_t i = pl.begin; i < pl.end; ++i) {
    mean += intensity[i];
    top = std::max(top, intensity[i]);
  }
  mean /= len;
  for (std::size_t i = pl.begin; i < pl.end; ++i) sq += (intensity[i] - mean) * (intensity[i] - mean);
  r.relative_variance = mean > 0.0 ? sq / len / (mean * mean) : 0.0;

  auto search = find_peaks(x, intensity, pump_width, th);
  r.peaks = search.peaks;
  r.background = search.background;
  r.contrast = search.background > 0.0 ? std::max(1.0, top / search.background) : 1.0;

  if (!steady) {
    r.cls = PatternClass::unsteady;
    return r;
  }
  if (r.relative_variance < th.var_eps) {
    r.cls = PatternClass::homogeneous;
    r.peaks.clear();
    return r;
  }
  const int count = static_cast<int>(r.peaks.size());
  if (count >= 1 && count <= th.max_peaks) {
    r.cls = PatternClass::localized;
    return r;
  }
  const auto line = dominant_line(x, intensity, pump_width, th);
  r.line_fraction = line.fraction;
  if (line.fraction > th.periodic_fraction) {
    r.cls = PatternClass::periodic;
    r.wavenumber = line.wavenumber;
    return r;
  }
  r.cls = PatternClass::mixed;
  return r;
}

PatternReport classify(const Snapshot& s, double pump_width, bool steady,
                       const ClassifyThresholds& th) {
  const auto I = s.intensity();
  return classify(s.x, I, pump_width, steady, th);
}

std::string report_text(const PatternReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "class: " << to_string(r.cls) << "\n";
  if (r.wavenumber) os << "wavenumber: " << *r.wavenumber << "\n";
  os << "background: " << r.background << "\n";
  os << "contrast: " << r.contrast << "\n";
  os << "relative_variance: " << r.relative_variance << "\n";
  os << "peaks: " << r.peaks.size() << "\n";
  for (const auto& p : r.peaks)
    os << "  x=" << p.position << " height=" << p.height << " fwhm=" << p.fwhm
       << " contrast=" << p.contrast << "\n";
  return os.str();
}

std::vector<BistabilityRow> bistability_curve(const NormalizedParams& params, double pump_sq_min,
                                              double pump_sq_max, int samples) {
  if (!(pump_sq_min >= 0.0) || !(pump_sq_max >= pump_sq_min))
    throw std::domain_error("pump range must be nonnegative and ordered");
  if (samples < 1) throw std::domain_error("need at least one sample");
  std::vector<BistabilityRow> rows;
  rows.reserve(samples);
  for (int s = 0; s < samples; ++s) {
    BistabilityRow row;
    row.pump_sq = samples == 1 ? pump_sq_min
                               : pump_sq_min + (pump_sq_max - pump_sq_min) * s / (samples - 1);
    for (double I : hss_intensities(params.detuning, row.pump_sq)) {
      const auto hs = hss_field(I, params.detuning, std::sqrt(row.pump_sq));
      row.branches.push_back({I, max_growth_rate(linear_stability(hs, 0.0, params)) < 0.0});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string bistability_csv(const std::vector<BistabilityRow>& rows) {
  std::string out = "pump_sq,branch,intensity,stable\n";
  char buf[128];
  for (const auto& r : rows)
    for (std::size_t b = 0; b < r.branches.size(); ++b) {
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%d\n", r.pump_sq, b,
                    r.branches[b].intensity, r.branches[b].stable ? 1 : 0);
      out += buf;
    }
  return out;
}

bool is_write_beam(const AddressBeam& b) {
  return std::abs(b.phase()) < 0.5 * std::numbers::pi;
}

namespace {

struct Detector {
  double pump_width;
  const ClassifyThresholds& th;
  std::optional<double> background;  // fixed reference, else per-snapshot median

  PeakSearch search(const Snapshot& s, std::span<const double> I) const {
    return background ? find_peaks(s.x, I, pump_width, *background, th)
                      : find_peaks(s.x, I, pump_width, th);
  }

  double tolerance(const Snapshot& s, double beam_width) const {
    const double dx = grid_spacing(s.x);
    const double halfwidth = 0.5 * dx * static_cast<double>(s.n_points());
    const double mirror = s.mirrors > 0 ? 2.0 * halfwidth / s.mirrors : dx;
    return std::max(3.0 * beam_width, mirror);
  }

  std::optional<Peak> near(const Snapshot& s, double center, double tol) const {
    const auto I = s.intensity();
    std::optional<Peak> best;
    for (const auto& p : search(s, I).peaks)
      if (std::abs(p.position - center) <= tol && (!best || p.height > best->height)) best = p;
    return best;
  }

  // No peak within tol of the centre and the intensity within beam_width of
  // it back within restore_tol of the background.
  bool restored(const Snapshot& s, double center, double tol, double beam_width,
                double restore_tol) const {
    const auto I = s.intensity();
    const auto found = search(s, I);
    for (const auto& p : found.peaks)
      if (std::abs(p.position - center) <= tol) return false;
    for (std::size_t i = 0; i < I.size(); ++i)
      if (std::abs(s.x[i] - center) <= beam_width &&
          std::abs(I[i] - found.background) > restore_tol * found.background)
        return false;
    return true;
  }
};

// Index of the last snapshot with tau <= t, or npos.
std::size_t last_before(const std::vector<Snapshot>& series, double t) {
  std::size_t idx = std::string::npos;
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i].tau <= t + 1e-9) idx = i;
  return idx;
}

}  // namespace

PersistenceReport soliton_persistence(const std::vector<Snapshot>& series,
                                      const PumpSchedule& schedule,
                                      const PersistenceOptions& opts) {
  PersistenceReport rep;
  if (series.empty()) return rep;
  std::vector<AddressBeam> writes, erases;
  for (const auto& b : schedule.beams) (is_write_beam(b) ? writes : erases).push_back(b);
  auto by_start = [](const AddressBeam& a, const AddressBeam& b) { return a.start < b.start; };
  std::sort(writes.begin(), writes.end(), by_start);
  std::sort(erases.begin(), erases.end(), by_start);

  // Background of the unaddressed state, before any beam switches on.
  double first_on = std::numeric_limits<double>::infinity();
  for (const auto& b : schedule.beams) first_on = std::min(first_on, b.start);
  std::size_t ref_idx = last_before(series, first_on);
  if (ref_idx == std::string::npos) ref_idx = 0;
  const auto& ref_snap = series[ref_idx];
  const Detector det{schedule.base.width, opts.thresholds,
                     plateau_median(ref_snap.x, ref_snap.intensity(), schedule.base.width,
                                    opts.thresholds)};

  for (const auto& w : writes) {
    WriteOutcome o;
    o.id = w.id;
    o.center = w.center;
    o.beam_off = w.stop;
    double last_seen = -1.0;
    bool started = false;
    for (const auto& s : series) {
      if (s.tau < w.stop - 1e-9) continue;
      started = true;
      if (!det.near(s, w.center, det.tolerance(s, w.width))) break;
      last_seen = s.tau;
    }
    if (started && last_seen >= 0.0) o.survived_tau = last_seen - w.stop;
    // An intended erasure ends the survival window early without counting against it.
    double horizon = opts.min_survival;
    for (const auto& e : erases)
      if (e.start > w.stop && std::abs(e.center - w.center) <= 3.0 * w.width)
        horizon = std::min(horizon, e.start - w.stop);
    o.written = started && last_seen >= 0.0 && o.survived_tau + 1e-9 >= horizon;
    rep.writes.push_back(o);
  }
  if (!rep.writes.empty()) {
    rep.written = rep.writes[0].written;
    rep.survived_tau = rep.writes[0].survived_tau;
  }
  if (rep.writes.size() >= 2) {
    rep.second_written = rep.writes[1].written;
    const auto& first = writes[0];
    const auto& second = writes[1];
    double until = std::numeric_limits<double>::infinity();
    for (const auto& e : erases)
      if (e.start >= second.start) until = std::min(until, e.start);
    const std::size_t ref = last_before(series, second.start);
    std::optional<Peak> h0;
    if (ref != std::string::npos)
      h0 = det.near(series[ref], first.center, det.tolerance(series[ref], first.width));
    if (!h0) {
      rep.disturbance_pct = 100.0;
    } else {
      double worst = 0.0;
      for (const auto& s : series) {
        if (s.tau < second.start - 1e-9 || s.tau >= until) continue;
        auto h = det.near(s, first.center, det.tolerance(s, first.width));
        const double d = h ? std::abs(h->height - h0->height) / h0->height : 1.0;
        worst = std::max(worst, d);
      }
      rep.disturbance_pct = 100.0 * worst;
    }
  }

  bool all = !erases.empty();
  for (const auto& e : erases) {
    EraseOutcome o;
    o.id = e.id;
    o.center = e.center;
    const std::size_t before = last_before(series, e.start);
    if (before != std::string::npos)
      o.present_before =
          det.near(series[before], e.center, det.tolerance(series[before], e.width)).has_value();
    // Judge at the last snapshot before any later beam switches on.
    double judge = std::numeric_limits<double>::infinity();
    for (const auto& b : schedule.beams)
      if (b.start >= e.stop) judge = std::min(judge, b.start);
    const std::size_t at = last_before(series, judge);
    if (at != std::string::npos && series[at].tau >= e.stop)
      o.erased = o.present_before &&
                 det.restored(series[at], e.center, det.tolerance(series[at], e.width),
                              e.width, opts.restore_tol);
    all = all && o.erased;
    rep.erases.push_back(o);
  }
  rep.erased = all;
  return rep;
}

std::string persistence_text(const PersistenceReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "written: " << (r.written ? "yes" : "no") << "\n";
  os << "second_written: " << (r.second_written ? "yes" : "no") << "\n";
  os << "survived_tau: " << r.survived_tau << "\n";
  os << "disturbance_pct: " << r.disturbance_pct << "\n";
  os << "erased: " << (r.erased ? "yes" : "no") << "\n";
  for (const auto& w : r.writes)
    os << "  write " << w.id << " at " << w.center << ": " << (w.written ? "persisted" : "lost")
       << " (" << w.survived_tau << " after beam-off)\n";
  for (const auto& e : r.erases)
    os << "  erase " << e.id << " at " << e.center << ": "
       << (e.erased ? "removed" : (e.present_before ? "still present" : "nothing to erase"))
       << "\n";
  return os.str();
}

std::vector<ErasePhaseRow> erase_phase_scan(const NormalizedParams& params,
                                            const PumpSchedule& schedule,
                                            const AddressBeam& erase,
                                            const std::vector<double>& phases, double tau_end,
                                            std::uint64_t seed, double dt) {
  std::vector<ErasePhaseRow> rows;
  const ClassifyThresholds th;
  for (double phase : phases) {
    PumpSchedule sched = schedule;
    AddressBeam b = erase;
    b.amplitude = std::polar(std::abs(erase.amplitude), phase);
    sched.beams.push_back(b);
    LatticeSimulator sim(params, sched, dt);
    sim.initialize(seed);
    SimulateOptions so;
    so.tau_end = tau_end;
    so.keep_snapshots = false;
    double first_on = std::numeric_limits<double>::infinity();
    for (const auto& other : sched.beams) first_on = std::min(first_on, other.start);
    std::optional<double> background;
    so.on_snapshot = [&](const Snapshot& snap) {
      if (!background || snap.tau <= first_on + 1e-9)
        background = plateau_median(snap.x, snap.intensity(), schedule.base.width, th);
    };
    auto res = simulate(sim, so);
    const auto& s = res.final_state;
    const Detector det{schedule.base.width, th, background};
    const double tol = det.tolerance(s, b.width);
    ErasePhaseRow row;
    row.phase = phase;
    row.erased = det.restored(s, b.center, tol, b.width, 0.1);
    const auto I = s.intensity();
    const double bg = det.search(s, I).background;
    double worst = 1.0;
    for (std::size_t i = 0; i < I.size(); ++i)
      if (std::abs(s.x[i] - b.center) <= tol && bg > 0.0) worst = std::max(worst, I[i] / bg);
    row.residual_contrast = worst;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace omps
