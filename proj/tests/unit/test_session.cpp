#include <cmath>

#include "doctest.h"
#include "omps/batch.hpp"
#include "omps/session.hpp"
#include "json.hpp"

using namespace omps;
using json = nlohmann::json;

namespace {

using Clock = Session::Clock;

json only(const std::vector<std::string>& msgs) {
  REQUIRE(msgs.size() == 1);
  return json::parse(msgs[0]);
}

void configure(Session& s, double rate = 1.0) {
  CHECK(only(s.handle(R"({"type":"hello","proto":1})"))["type"] == "hello");
  json c{{"type", "configure"}, {"preset", "fig2-soliton"}, {"seed", 3}, {"rate", rate}};
  CHECK(only(s.handle(c.dump()))["state"] == "configured");
}

}  // namespace

TEST_CASE("f32 base64 round trip") {
  const std::vector<double> v{0.0, 1.5, -2.25, 1e-3, 3.0e5};
  const auto back = decode_f32_base64(encode_f32_base64(v));
  REQUIRE(back.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(back[i] == static_cast<float>(v[i]));
}

TEST_CASE("decimation") {
  std::vector<double> x(1100), I(1100), Z(1100);
  for (int i = 0; i < 1100; ++i) {
    x[i] = i;
    I[i] = (i == 7) ? 9.0 : 1.0;
    Z[i] = 2.0;
  }
  const auto d = decimate(x, I, Z);
  CHECK(d.factor == 3);
  CHECK(d.intensity.size() <= static_cast<std::size_t>(kMaxFrameSamples));
  CHECK(d.intensity[2] == 9.0);
  CHECK(d.x[0] == doctest::Approx(1.0));
  CHECK(d.Z[5] == 2.0);
  const auto same = decimate(std::span(x).first(300), std::span(I).first(300), std::span(Z).first(300));
  CHECK(same.factor == 1);
  CHECK(same.intensity.size() == 300);
}

TEST_CASE("step budget follows the rate") {
  Session s;
  configure(s, 1.0);
  s.handle(R"({"type":"start"})");
  const auto t0 = Clock::now();
  CHECK(s.tick(0.0, t0).steps == 0);
  const auto one = s.tick(0.01, t0).steps;
  const auto ten = s.tick(0.1, t0).steps;
  CHECK(one >= 9);
  CHECK(one <= 11);
  CHECK(std::abs(ten - 10 * one) <= 1);
}

TEST_CASE("pause and resume") {
  Session s;
  configure(s);
  CHECK(only(s.handle(R"({"type":"pause"})"))["type"] == "error");
  s.handle(R"({"type":"start"})");
  CHECK(s.state() == SessionState::running);
  s.handle(R"({"type":"pause"})");
  CHECK(s.state() == SessionState::paused);
  CHECK(s.tick(1.0, Clock::now()).steps == 0);
  s.handle(R"({"type":"resume"})");
  CHECK(s.state() == SessionState::running);
  CHECK(s.tick(0.01, Clock::now()).steps > 0);
}

TEST_CASE("malformed and invalid commands yield errors") {
  Session s;
  CHECK(only(s.handle("{not json"))["type"] == "error");
  CHECK(only(s.handle(R"({"cmd":"start"})"))["type"] == "error");
  CHECK(only(s.handle(R"({"type":"start"})"))["type"] == "error");
  CHECK(only(s.handle(R"({"type":"hello","proto":99})"))["type"] == "error");
  CHECK(only(s.handle(R"({"type":"configure","preset":"nope"})"))["type"] == "error");
  configure(s);
  CHECK(only(s.handle(R"({"type":"warp"})"))["type"] == "error");
  CHECK(only(s.handle(R"({"type":"set_rate","rate":-1})"))["type"] == "error");
  CHECK(only(s.handle(R"({"type":"set_pump","E0":1,"E0sq":1})"))["type"] == "error");
  CHECK(only(s.handle(R"({"type":"add_beam","id":"a","x0":"left","duration":1})"))["type"] ==
        "error");
  CHECK(only(s.handle(R"({"type":"add_beam","id":"a","x0":0,"duration":1})"))["type"] == "ack");
  CHECK(only(s.handle(R"({"type":"add_beam","id":"a","x0":3,"duration":1})"))["type"] == "error");
  CHECK(only(s.handle(R"({"type":"remove_beam","id":"a"})"))["type"] == "ack");
  CHECK(only(s.handle(R"({"type":"remove_beam","id":"a"})"))["type"] == "error");
  CHECK(s.state() == SessionState::configured);
}

TEST_CASE("frames are throttled and reproducible") {
  auto frames = [] {
    Session s;
    configure(s, 1.0);
    s.enqueue(R"({"type":"start"})");
    std::vector<std::string> out;
    auto t = Clock::time_point{};
    for (int i = 0; i < 40; ++i) {
      t += std::chrono::milliseconds(10);
      for (auto& m : s.tick(0.01, t).messages)
        if (json::parse(m)["type"] == "frame") out.push_back(m);
    }
    return out;
  };
  const auto a = frames();
  const auto b = frames();
  CHECK(a == b);
  CHECK(a.size() <= 14);
  CHECK(a.size() >= 10);
  const auto first = json::parse(a.front());
  CHECK(first.contains("x"));
  CHECK(first["n"].get<int>() <= kMaxFrameSamples);
  CHECK_FALSE(json::parse(a.back()).contains("x"));
}

TEST_CASE("steered beams match a scheduled batch run") {
  Session s;
  configure(s, 1.0);
  s.handle(R"({"type":"start"})");
  s.tick(0.5, Clock::now());
  const auto ack = only(s.handle(
      R"({"type":"add_beam","id":"w","x0":0,"amplitude":1,"phase":0,"sigma":1.5,"duration":0.5})"));
  s.tick(1.0, Clock::now());

  auto c = preset("fig2-soliton");
  c.integrator.seed = 3;
  AddressBeam b;
  b.id = "w";
  b.amplitude = 1.0;
  b.width = 1.5;
  b.start = ack["tau"].get<double>();
  b.stop = b.start + 0.5;
  c.pump.beams.push_back(b);
  auto sim = make_simulator(c);
  while (sim->steps() < s.simulator()->steps()) sim->step();
  const auto f1 = s.simulator()->field();
  const auto f2 = sim->field();
  for (std::size_t i = 0; i < f1.size(); ++i) CHECK(f1[i] == f2[i]);
}

TEST_CASE("snapshot request and shutdown") {
  Session s;
  configure(s);
  const auto snap = only(s.handle(R"({"type":"snapshot_request"})"));
  CHECK(snap["type"] == "snapshot");
  s.handle(R"({"type":"shutdown"})");
  CHECK(s.finished());
  CHECK(only(s.handle(R"({"type":"start"})"))["type"] == "error");
}
