#pragma once

#include <atomic>
#include <cstdint>
#include <string>

namespace omps {

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8765;
  int max_sessions = 4;
  double tick_seconds = 1.0 / 60.0;
};

// "HOST:PORT"; throws std::invalid_argument.
void parse_bind(const std::string& spec, ServerOptions& opts);

// WebSocket service: every connection owns one Session running on its own
// thread. Blocks until `stop` becomes true (checked between accepts).
// `on_listening` receives the bound port (useful with port 0).
void serve(const ServerOptions& opts, const std::atomic<bool>& stop,
           void (*on_listening)(std::uint16_t port, void* ctx) = nullptr, void* ctx = nullptr);

}  // namespace omps
