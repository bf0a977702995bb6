#include "svm/scenario.hpp"

#include <charconv>

#include "svm/error.hpp"
#include "svm/peripherals.hpp"

namespace svm {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, std::size_t line, const char* what) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error(ErrorCode::ParseError, line, std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

const DriverDecl* find_decl(const Scenario& s, std::string_view name) {
  for (const auto& d : s.drivers)
    if (d.name == name) return &d;
  return nullptr;
}

const char* kind_name(DriverKind k) {
  switch (k) {
    case DriverKind::Led: return "led";
    case DriverKind::Button: return "button";
    case DriverKind::Uart: return "uart";
  }
  return "?";
}

}  // namespace

Scenario load_scenario(std::string_view text) {
  Scenario s;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = split(line);
    if (tok.empty()) continue;

    if (tok[0] == "driver") {
      if (!s.events.empty()) throw Error(ErrorCode::ParseError, lineno, "driver declared after the first event");
      if (tok.size() < 3) throw Error(ErrorCode::ParseError, lineno, "expected: driver <name> <kind>");
      if (find_decl(s, tok[1])) throw Error(ErrorCode::ParseError, lineno, "driver '" + std::string(tok[1]) + "' declared twice");
      DriverDecl d;
      d.name = tok[1];
      if (tok[2] == "led") d.kind = DriverKind::Led;
      else if (tok[2] == "button") d.kind = DriverKind::Button;
      else if (tok[2] == "uart") d.kind = DriverKind::Uart;
      else throw Error(ErrorCode::UnknownDriverKind, lineno, "'" + std::string(tok[2]) + "'");
      for (std::size_t i = 3; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        std::string_view key = tok[i].substr(0, eq);
        if (eq == std::string_view::npos || key != "buffer" || d.kind != DriverKind::Uart)
          throw Error(ErrorCode::ParseError, lineno, "unknown parameter '" + std::string(tok[i]) + "'");
        d.buffer = parse_number<std::uint32_t>(tok[i].substr(eq + 1), lineno, "buffer size");
        if (d.buffer == 0) throw Error(ErrorCode::ParseError, lineno, "buffer size must be positive");
      }
      s.drivers.push_back(std::move(d));
      continue;
    }

    if (tok.size() < 3) throw Error(ErrorCode::ParseError, lineno, "expected: <time_ms> <driver> <action>");
    ScenarioEvent ev;
    ev.line = lineno;
    ev.time_ms = parse_number<std::uint64_t>(tok[0], lineno, "time");
    ev.driver = tok[1];
    const DriverDecl* decl = find_decl(s, tok[1]);
    if (!decl) throw Error(ErrorCode::ParseError, lineno, "undeclared driver '" + ev.driver + "'");
    std::string_view action = tok[2];
    std::size_t want_args = 0;
    if (action == "press" || action == "release") {
      ev.action = action == "press" ? Action::Press : Action::Release;
      if (decl->kind != DriverKind::Button)
        throw Error(ErrorCode::ParseError, lineno, std::string(action) + " on a " + kind_name(decl->kind));
    } else if (action == "drain" || action == "rx") {
      ev.action = action == "drain" ? Action::Drain : Action::Rx;
      want_args = 1;
      if (decl->kind != DriverKind::Uart)
        throw Error(ErrorCode::ParseError, lineno, std::string(action) + " on a " + kind_name(decl->kind));
    } else {
      throw Error(ErrorCode::ParseError, lineno, "unknown action '" + std::string(action) + "'");
    }
    if (tok.size() != 3 + want_args) throw Error(ErrorCode::ParseError, lineno, "wrong argument count for " + std::string(action));
    if (want_args) {
      ev.arg = parse_number<std::int32_t>(tok[3], lineno, "argument");
      if (ev.arg < 0 || (ev.action == Action::Rx && ev.arg > 255))
        throw Error(ErrorCode::ParseError, lineno, "argument out of range");
    }
    if (!s.events.empty() && ev.time_ms < s.events.back().time_ms)
      throw Error(ErrorCode::NonMonotoneTime, lineno,
                  std::to_string(ev.time_ms) + " after " + std::to_string(s.events.back().time_ms));
    s.events.push_back(std::move(ev));
  }
  return s;
}

void register_drivers(const Scenario& scenario, Bridge& bridge) {
  for (const auto& d : scenario.drivers) {
    std::unique_ptr<Peripheral> dev;
    switch (d.kind) {
      case DriverKind::Led: dev = std::make_unique<Led>(); break;
      case DriverKind::Button: dev = std::make_unique<Button>(); break;
      case DriverKind::Uart: dev = std::make_unique<Uart>(d.buffer); break;
    }
    bridge.register_driver(d.name, std::move(dev));
  }
}

ScenarioEngine::ScenarioEngine(const Scenario& scenario, Bridge& bridge, VirtualClock& clock, Trace& trace)
    : events_(scenario.events), bridge_(bridge), clock_(clock), trace_(trace) {}

void ScenarioEngine::post_due() {
  while (next_ < events_.size() && events_[next_].time_ms <= clock_.now()) {
    const ScenarioEvent& ev = events_[next_++];
    auto id = bridge_.find(ev.driver);
    if (!id) throw Error(ErrorCode::UnknownDriver, ev.line, "driver '" + ev.driver + "' is not registered");
    DriverHandle& drv = bridge_.driver(*id);

    DriverMessage msg;
    msg.driver = *id;
    msg.time_ms = clock_.now();
    const char* kind = "data";
    switch (ev.action) {
      case Action::Press:
      case Action::Release: {
        int level = ev.action == Action::Press ? 1 : 0;
        if (auto* b = dynamic_cast<Button*>(drv.device.get())) b->set_level(level);
        msg.payload = Value::integer(level);
        break;
      }
      case Action::Drain:
        msg.kind = MessageKind::Drain;
        msg.payload = Value::integer(ev.arg);
        kind = "drain";
        break;
      case Action::Rx:
        msg.payload = Value::integer(ev.arg);
        break;
    }
    const std::string drv_id = std::to_string(index_of(*id));
    if (bridge_.queue().post(msg)) {
      trace_.emit("post", {{"drv", drv_id}, {"kind", kind}, {"val", to_string(msg.payload)}});
    } else {
      trace_.emit("drop", {{"drv", drv_id}, {"val", to_string(msg.payload)}, {"where", "queue"}});
    }
  }
}

bool ScenarioEngine::advance() {
  if (next_ == events_.size()) return false;
  clock_.advance_to(events_[next_].time_ms);
  post_due();
  return true;
}

}  // namespace svm
