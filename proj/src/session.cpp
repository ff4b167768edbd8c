#include "omps/session.hpp"

#include <boost/beast/core/detail/base64.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "json.hpp"
#include "omps/batch.hpp"

namespace omps {

using nlohmann::json;
namespace b64 = boost::beast::detail::base64;

std::string encode_f32_base64(std::span<const double> values) {
  std::vector<std::uint8_t> raw(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int b = 0; b < 4; ++b) raw[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  std::string out(b64::encoded_size(raw.size()), '\0');
  out.resize(b64::encode(out.data(), raw.data(), raw.size()));
  return out;
}

std::vector<float> decode_f32_base64(const std::string& text) {
  std::vector<std::uint8_t> raw(b64::decoded_size(text.size()));
  const auto [written, read] = b64::decode(raw.data(), text.data(), text.size());
  const bool padded_tail =
      std::all_of(text.begin() + static_cast<std::ptrdiff_t>(read), text.end(),
                  [](char c) { return c == '='; }) &&
      text.size() - read <= 2;
  if (!padded_tail || written % 4 != 0) throw std::runtime_error("bad base64 payload");
  std::vector<float> out(written / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(raw[4 * i + b]) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

namespace {

std::string encode_bytes_base64(const std::vector<std::uint8_t>& raw) {
  std::string out(b64::encoded_size(raw.size()), '\0');
  out.resize(b64::encode(out.data(), raw.data(), raw.size()));
  return out;
}

std::string error_message(const std::string& msg, const std::string& command = {}) {
  json j{{"type", "error"}, {"message", msg}};
  if (!command.empty()) j["command"] = command;
  return j.dump();
}

}  // namespace

DecimatedProfile decimate(std::span<const double> x, std::span<const double> intensity,
                          std::span<const double> Z, int max_samples) {
  DecimatedProfile d;
  const std::size_t n = x.size();
  if (max_samples < 1) max_samples = 1;
  d.factor = static_cast<int>((n + max_samples - 1) / max_samples);
  if (d.factor < 1) d.factor = 1;
  for (std::size_t b = 0; b < n; b += d.factor) {
    const std::size_t e = std::min(n, b + d.factor);
    double sx = 0.0, sz = 0.0, mi = intensity[b];
    for (std::size_t i = b; i < e; ++i) {
      sx += x[i];
      sz += Z[i];
      mi = std::max(mi, intensity[i]);
    }
    const double cnt = static_cast<double>(e - b);
    d.x.push_back(sx / cnt);
    d.intensity.push_back(mi);
    d.Z.push_back(sz / cnt);
  }
  return d;
}

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::idle: return "idle";
    case SessionState::configured: return "configured";
    case SessionState::running: return "running";
    case SessionState::paused: return "paused";
    case SessionState::terminated: return "terminated";
  }
  return "idle";
}

Session::Session() = default;

void Session::enqueue(std::string text) {
  std::lock_guard lock(queue_mu_);
  queue_.push_back(std::move(text));
}

std::string Session::status_message(const std::string& extra) const {
  json j{{"type", "status"}, {"state", std::string(to_string(state_))}};
  if (sim_) j["tau"] = sim_->tau();
  if (!extra.empty()) j["message"] = extra;
  return j.dump();
}

std::vector<std::string> Session::handle(const std::string& text) { return apply(text); }

std::vector<std::string> Session::apply(const std::string& text) {
  if (state_ == SessionState::terminated) return {error_message("session has terminated")};
  json cmd;
  try {
    cmd = json::parse(text);
  } catch (const json::parse_error& e) {
    return {error_message(std::string("malformed JSON: ") + e.what())};
  }
  if (!cmd.is_object() || !cmd.contains("type") || !cmd["type"].is_string())
    return {error_message("command needs a string 'type' field")};
  const std::string type = cmd["type"];

  try {
    if (type == "hello") {
      const int proto = cmd.value("proto", 0);
      if (proto != kProtocolVersion)
        return {error_message("unsupported protocol version " + std::to_string(proto), type)};
      hello_ = true;
      return {json{{"type", "hello"}, {"proto", kProtocolVersion}, {"server", "omps"}}.dump()};
    }
    if (type == "configure") {
      RunConfig c;
      if (cmd.contains("preset"))
        c = preset(cmd.at("preset").get<std::string>());
      else if (cmd.contains("config"))
        c = parse_config(cmd.at("config").get<std::string>(), "<configure>");
      else
        return {error_message("configure needs 'preset' or 'config'", type)};
      if (cmd.contains("seed")) c.integrator.seed = cmd.at("seed").get<std::uint64_t>();
      if (cmd.contains("mode")) {
        const std::string m = cmd.at("mode");
        if (m == "lattice") c.mode = RunMode::lattice;
        else if (m == "continuum") c.mode = RunMode::continuum;
        else return {error_message("mode must be lattice or continuum", type)};
      }
      if (c.mode == RunMode::oracle) return {error_message("oracle mode cannot be steered", type)};
      double rate = kDefaultSessionRate;
      if (cmd.contains("rate")) rate = cmd.at("rate").get<double>();
      if (!(rate > 0.0)) return {error_message("rate must be positive", type)};
      auto sim = make_simulator(c);
      config_ = std::move(c);
      sim_ = std::move(sim);
      rate_ = rate;
      carry_ = 0.0;
      sent_x_ = false;
      last_frame_.reset();
      prev_i_.clear();
      prev_z_.clear();
      calm_ = 0;
      steady_ = false;
      dirty_ = true;
      state_ = SessionState::configured;
      return {status_message()};
    }
    if (type == "shutdown") {
      state_ = SessionState::terminated;
      return {status_message()};
    }

    if (!sim_) return {error_message("no simulation configured", type)};

    if (type == "start") {
      if (state_ == SessionState::configured || state_ == SessionState::paused)
        state_ = SessionState::running;
      return {status_message()};
    }
    if (type == "pause") {
      if (state_ != SessionState::running) return {error_message("session is not running", type)};
      state_ = SessionState::paused;
      return {status_message()};
    }
    if (type == "resume") {
      if (state_ != SessionState::paused) return {error_message("session is not paused", type)};
      state_ = SessionState::running;
      return {status_message()};
    }
    if (type == "set_rate") {
      const double r = cmd.at("rate").get<double>();
      if (!(r > 0.0)) return {error_message("rate must be positive", type)};
      rate_ = r;
      return {status_message()};
    }
    if (type == "set_pump") {
      BasePump base = sim_->schedule().base;
      if (cmd.contains("E0") && cmd.contains("E0sq"))
        return {error_message("give E0 or E0sq, not both", type)};
      if (cmd.contains("E0")) base.amplitude = cmd.at("E0").get<double>();
      if (cmd.contains("E0sq")) {
        const double v = cmd.at("E0sq").get<double>();
        if (v < 0.0) return {error_message("E0sq must be nonnegative", type)};
        base.amplitude = std::sqrt(v);
      }
      if (cmd.contains("sigma_x")) {
        const auto& s = cmd.at("sigma_x");
        base.width = s.is_null() ? std::numeric_limits<double>::infinity() : s.get<double>();
      }
      sim_->set_base_pump(base);
      dirty_ = true;
      return {json{{"type", "ack"}, {"command", type}, {"tau", sim_->tau()}}.dump()};
    }
    if (type == "add_beam") {
      AddressBeam b;
      b.id = cmd.at("id").get<std::string>();
      if (b.id.empty()) return {error_message("beam id must not be empty", type)};
      b.center = cmd.at("x0").get<double>();
      const double amp = cmd.value("amplitude", 1.0);
      const double phase = cmd.value("phase", 0.0);
      b.amplitude = std::polar(amp, phase);
      b.width = cmd.value("sigma", 1.5);
      const double duration = cmd.at("duration").get<double>();
      if (!(duration > 0.0)) return {error_message("duration must be positive", type)};
      b.start = sim_->tau();
      b.stop = b.start + duration;
      sim_->add_beam(b);
      dirty_ = true;
      return {json{{"type", "ack"}, {"command", type}, {"id", b.id}, {"tau", b.start}}.dump()};
    }
    if (type == "remove_beam") {
      const std::string id = cmd.at("id").get<std::string>();
      if (!sim_->remove_beam(id)) return {error_message("no beam with id '" + id + "'", type)};
      dirty_ = true;
      return {json{{"type", "ack"}, {"command", type}, {"id", id}, {"tau", sim_->tau()}}.dump()};
    }
    if (type == "snapshot_request") {
      const auto s = sim_->snapshot();
      return {json{{"type", "snapshot"},
                   {"tau", s.tau},
                   {"format", "omps-v1"},
                   {"data", encode_bytes_base64(encode_snapshot(s))}}
                  .dump()};
    }
    return {error_message("unknown command type '" + type + "'", type)};
  } catch (const json::exception& e) {
    return {error_message(std::string("bad command fields: ") + e.what(), type)};
  } catch (const std::exception& e) {
    return {error_message(e.what(), type)};
  }
}

std::string Session::frame_message(bool force_x) {
  const auto I = sim_->intensity();
  const auto Z = sim_->displacement_field();
  const auto& x = sim_->grid().x;

  // steadiness from the change between consecutive frames
  const double tau = sim_->tau();
  if (!prev_i_.empty() && tau > prev_tau_) {
    double change = 0.0;
    for (std::size_t i = 0; i < I.size(); ++i)
      change = std::max({change, std::abs(I[i] - prev_i_[i]), std::abs(Z[i] - prev_z_[i])});
    const double rate = change / (tau - prev_tau_);
    if (rate < config_.integrator.steady_tol)
      ++calm_;
    else
      calm_ = 0;
    steady_ = calm_ >= config_.integrator.steady_consecutive;
  }
  if (prev_i_.empty() || tau > prev_tau_) {
    prev_i_ = I;
    prev_z_ = Z;
    prev_tau_ = tau;
  }

  const auto d = decimate(x, I, Z);
  json beams = json::array();
  for (const auto& b : sim_->schedule().beams)
    beams.push_back({{"id", b.id},
                     {"x0", b.center},
                     {"sigma", b.width},
                     {"amplitude", std::abs(b.amplitude)},
                     {"phase", b.phase()},
                     {"start", b.start},
                     {"stop", b.stop},
                     {"active", b.active(tau)}});
  json f{{"type", "frame"},
         {"tau", tau},
         {"decimation", d.factor},
         {"n", d.intensity.size()},
         {"intensity", encode_f32_base64(d.intensity)},
         {"Z", encode_f32_base64(d.Z)},
         {"beams", beams},
         {"steady", steady_},
         {"state", std::string(to_string(state_))}};
  if (!sent_x_ || force_x) {
    f["x"] = encode_f32_base64(d.x);
    sent_x_ = true;
  }
  dirty_ = false;
  return f.dump();
}

TickResult Session::tick(double budget_seconds, Clock::time_point now,
                         std::optional<Clock::time_point> deadline) {
  TickResult r;
  std::deque<std::string> pending;
  {
    std::lock_guard lock(queue_mu_);
    pending.swap(queue_);
  }
  for (const auto& text : pending) {
    for (auto& m : apply(text)) r.messages.push_back(std::move(m));
    if (state_ == SessionState::terminated) return r;
  }
  if (state_ != SessionState::running || !sim_) return r;

  const double dt = sim_->dt();
  const double target = rate_ * std::max(0.0, budget_seconds) + carry_;
  const auto steps = static_cast<std::int64_t>(std::floor(target / dt));
  carry_ = target - static_cast<double>(steps) * dt;
  try {
    for (std::int64_t s = 0; s < steps; ++s) {
      if (deadline && Clock::now() >= *deadline) {
        carry_ = 0.0;
        break;
      }
      sim_->step();
      ++r.steps;
    }
  } catch (const DivergedError& e) {
    state_ = SessionState::terminated;
    r.messages.push_back(
        json{{"type", "status"}, {"state", "diverged"}, {"tau", e.tau()}, {"message", e.what()}}
            .dump());
    return r;
  }
  if (r.steps > 0) dirty_ = true;

  const auto interval = std::chrono::duration<double>(1.0 / kMaxFrameRate);
  if (dirty_ && (!last_frame_ || now - *last_frame_ >= interval)) {
    r.messages.push_back(frame_message());
    last_frame_ = now;
  }
  return r;
}

}  // namespace omps
