#include <doctest.h>

#include "svm/error.hpp"
#include "testkit.hpp"

using namespace svm;

TEST_CASE("every record of a full run parses against the schema") {
  auto r = svmtest::run_source(svmtest::fixture("button_blinky.sasm"), svmtest::fixture("button_blinky_long.scn"));
  const auto& lines = r.vm->trace().lines();
  REQUIRE(lines.size() > 20);
  std::uint64_t last = 0;
  for (const auto& line : lines) {
    INFO(line);
    TraceRecord rec = parse_trace_line(line);
    CHECK(rec.format() == line);
    CHECK(rec.time_ms >= last);  // virtual time never goes back
    last = rec.time_ms;
  }
  CHECK(parse_trace_line(lines.back()).kind == "halt");
}

TEST_CASE("text joins lines with newlines") {
  VirtualClock clock;
  Trace t(&clock);
  t.emit("dispatch", {{"tid", "0"}});
  clock.advance_to(5);
  t.emit("sleep", {{"steps", "3"}});
  CHECK(t.text() == "t=0 ev=dispatch tid=0\nt=5 ev=sleep steps=3\n");
}

TEST_CASE("parsing rejects anything outside the schema") {
  const char* bad[] = {
      "t=0 ev=teleport tid=0",           // unknown kind
      "t=0 ev=dispatch thread=0",        // unknown field
      "t=0 ev=dispatch",                 // missing field
      "t=0 ev=dispatch tid=0 extra=1",   // extra field
      "t=x ev=dispatch tid=0",           // bad time
      "ev=dispatch t=0 tid=0",           // wrong order
      "t=0 ev=dispatch tid",             // malformed token
      "",
  };
  for (const char* line : bad) {
    INFO(line);
    CHECK_THROWS_AS(parse_trace_line(line), Error);
  }
}

TEST_CASE("emitting outside the schema is a programming error") {
  Trace t;
  CHECK_THROWS_AS(t.emit("dispatch", {{"thread", "0"}}), std::logic_error);
  CHECK_THROWS_AS(t.emit("nonsense", {}), std::logic_error);
  CHECK_THROWS_AS(t.emit("dispatch", {{"tid", "a b"}}), std::logic_error);
  CHECK(t.lines().empty());
}

TEST_CASE("a disabled trace records nothing") {
  Trace t;
  t.set_enabled(false);
  t.emit("dispatch", {{"tid", "0"}});
  CHECK(t.lines().empty());
}
