#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omps/config.hpp"
#include "omps/field_solver.hpp"

namespace omps {

inline constexpr int kProtocolVersion = 1;
inline constexpr double kMaxFrameRate = 30.0;
inline constexpr int kMaxFrameSamples = 512;
inline constexpr double kDefaultSessionRate = 20.0;  // tau per wall second

// Little-endian f32 arrays in base64, as carried by frame messages.
std::string encode_f32_base64(std::span<const double> values);
std::vector<float> decode_f32_base64(const std::string& text);

struct DecimatedProfile {
  int factor = 1;
  std::vector<double> x, intensity, Z;
};

// Groups of `factor` consecutive samples, factor = ceil(n / max_samples):
// intensity is max-pooled, Z and x are averaged.
DecimatedProfile decimate(std::span<const double> x, std::span<const double> intensity,
                          std::span<const double> Z, int max_samples = kMaxFrameSamples);

enum class SessionState { idle, configured, running, paused, terminated };
std::string_view to_string(SessionState s);

struct TickResult {
  std::int64_t steps = 0;
  std::vector<std::string> messages;  // JSON text, in send order
};

// One simulation owned by one connection. Commands arrive as JSON text
// through an ordered queue and are applied only between steps.
class Session {
 public:
  using Clock = std::chrono::steady_clock;

  Session();

  // Thread-safe; may be called from the network side at any time.
  void enqueue(std::string text);

  // Applies queued commands, then advances by
  //   floor((rate * budget + carry) / dt)
  // steps (zero unless running) and emits at most one frame if the frame
  // interval has elapsed at `now`. Stepping stops early at `deadline`.
  TickResult tick(double budget_seconds, Clock::time_point now,
                  std::optional<Clock::time_point> deadline = std::nullopt);

  // Applies one command immediately; returns the replies.
  std::vector<std::string> handle(const std::string& text);

  SessionState state() const { return state_; }
  bool finished() const { return state_ == SessionState::terminated; }
  const Simulator* simulator() const { return sim_.get(); }
  double rate() const { return rate_; }

  // Frame of the current state; the x array is included on the first frame
  // only unless `force_x`.
  std::string frame_message(bool force_x = false);

 private:
  std::vector<std::string> apply(const std::string& text);
  std::string status_message(const std::string& extra = {}) const;

  std::mutex queue_mu_;
  std::deque<std::string> queue_;

  SessionState state_ = SessionState::idle;
  RunConfig config_;
  std::unique_ptr<Simulator> sim_;
  double rate_ = kDefaultSessionRate;
  double carry_ = 0.0;
  bool hello_ = false;
  bool sent_x_ = false;
  std::optional<Clock::time_point> last_frame_;
  bool dirty_ = true;  // state changed since the last frame

  std::vector<double> prev_i_, prev_z_;
  double prev_tau_ = 0.0;
  int calm_ = 0;
  bool steady_ = false;
};

}  // namespace omps
