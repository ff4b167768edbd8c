#include "omps/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <deque>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "omps/session.hpp"

namespace omps {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

void parse_bind(const std::string& spec, ServerOptions& opts) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size())
    throw std::invalid_argument("bind address must be HOST:PORT");
  const std::string port = spec.substr(colon + 1);
  std::size_t used = 0;
  unsigned long p = 0;
  try {
    p = std::stoul(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port.size() || p > 65535) throw std::invalid_argument("bad port '" + port + "'");
  opts.host = spec.substr(0, colon);
  opts.port = static_cast<std::uint16_t>(p);
}

namespace {

// One connection: reads commands into the session queue, ticks the session on
// a timer and writes replies and frames in order. Everything runs on the
// connection's own io_context thread.
class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(asio::io_context& ioc, tcp::socket socket, double tick_seconds,
             std::atomic<int>& live)
      : ws_(std::move(socket)), timer_(ioc), tick_(tick_seconds), live_(live) {}

  ~Connection() { --live_; }

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->last_tick_ = Session::Clock::now();
      self->read();
      self->schedule();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->timer_.cancel();
        return;
      }
      self->session_.enqueue(beast::buffers_to_string(self->buffer_.data()));
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void schedule() {
    timer_.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(tick_)));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->on_tick();
    });
  }

  void on_tick() {
    const auto now = Session::Clock::now();
    const double budget = std::chrono::duration<double>(now - last_tick_).count();
    last_tick_ = now;
    auto deadline = now + std::chrono::duration_cast<Session::Clock::duration>(
                              std::chrono::duration<double>(2.0 * tick_));
    auto result = session_.tick(budget, now, deadline);
    for (auto& m : result.messages) send(std::move(m));
    if (session_.finished()) {
      closing_ = true;
      flush();
      return;
    }
    schedule();
  }

  void send(std::string msg) {
    // Frames are dropped while the client is behind; replies never are.
    if (outbox_.size() > 8 && msg.find("\"type\":\"frame\"") != std::string::npos) return;
    outbox_.push_back(std::move(msg));
    flush();
  }

  void flush() {
    if (writing_ || closed_) return;
    if (outbox_.empty()) {
      if (closing_) {
        closed_ = true;
        ws_.async_close(websocket::close_code::normal,
                        [self = shared_from_this()](beast::error_code) {});
      }
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->writing_ = false;
                      if (ec) {
                        self->closed_ = true;
                        self->timer_.cancel();
                        return;
                      }
                      self->outbox_.pop_front();
                      self->flush();
                    });
  }

  websocket::stream<tcp::socket> ws_;
  asio::steady_timer timer_;
  beast::flat_buffer buffer_;
  Session session_;
  double tick_;
  std::atomic<int>& live_;
  Session::Clock::time_point last_tick_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
};

void reject(tcp::socket socket, const std::string& reason) {
  try {
    websocket::stream<tcp::socket> ws(std::move(socket));
    ws.accept();
    ws.text(true);
    ws.write(asio::buffer(nlohmann::json{{"type", "error"}, {"message", reason}}.dump()));
    ws.close(websocket::close_code::try_again_later);
  } catch (const std::exception&) {
  }
}

}  // namespace

void serve(const ServerOptions& opts, const std::atomic<bool>& stop,
           void (*on_listening)(std::uint16_t, void*), void* ctx) {
  if (opts.max_sessions < 1) throw std::invalid_argument("max_sessions must be at least 1");
  asio::io_context accept_ctx;
  tcp::acceptor acceptor(accept_ctx);
  const tcp::endpoint ep(asio::ip::make_address(opts.host), opts.port);
  acceptor.open(ep.protocol());
  acceptor.set_option(asio::socket_base::reuse_address(true));
  acceptor.bind(ep);
  acceptor.listen();
  acceptor.non_blocking(true);
  if (on_listening) on_listening(acceptor.local_endpoint().port(), ctx);

  std::atomic<int> live{0};
  std::vector<std::thread> workers;
  std::vector<std::shared_ptr<asio::io_context>> contexts;
  while (!stop.load()) {
    auto ioc = std::make_shared<asio::io_context>();
    tcp::socket socket(*ioc);
    beast::error_code ec;
    acceptor.accept(socket, ec);
    if (ec == asio::error::would_block || ec == asio::error::try_again) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      continue;
    }
    if (ec) continue;
    if (live.load() >= opts.max_sessions) {
      reject(std::move(socket), "session limit reached");
      continue;
    }
    socket.non_blocking(false);
    ++live;
    auto conn = std::make_shared<Connection>(*ioc, std::move(socket), opts.tick_seconds, live);
    conn->start();
    conn.reset();
    contexts.push_back(ioc);
    workers.emplace_back([ioc] {
      try {
        ioc->run();
      } catch (const std::exception& e) {
        std::cerr << "session error: " << e.what() << "\n";
      }
    });
  }
  for (auto& c : contexts) c->stop();
  for (auto& t : workers) t.join();
}

}  // namespace omps
