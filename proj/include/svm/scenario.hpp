#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "svm/bridge.hpp"
#include "svm/clock.hpp"
#include "svm/trace.hpp"
#include "svm/vm.hpp"

namespace svm {

enum class DriverKind { Led, Button, Uart };

struct DriverDecl {
  std::string name;
  DriverKind kind = DriverKind::Led;
  std::uint32_t buffer = 8;  // uart only
};

enum class Action { Press, Release, Drain, Rx };

struct ScenarioEvent {
  std::uint64_t time_ms = 0;
  std::string driver;
  Action action = Action::Press;
  std::int32_t arg = 0;
  std::size_t line = 0;
};

struct Scenario {
  std::vector<DriverDecl> drivers;
  std::vector<ScenarioEvent> events;
};

/// Parse the line-oriented scenario format:
///
///   # comment
///   driver <name> led|button|uart [buffer=N]
///   <time_ms> <name> press|release|drain <n>|rx <byte>
///
/// Driver lines come first; times never decrease.
Scenario load_scenario(std::string_view text);

/// Register the declared drivers in order, so ids follow declaration order.
void register_drivers(const Scenario& scenario, Bridge& bridge);

/// Feeds scenario events into the bridge queue as virtual time passes.
class ScenarioEngine final : public ExternalSource {
 public:
  ScenarioEngine(const Scenario& scenario, Bridge& bridge, VirtualClock& clock, Trace& trace);

  void post_due() override;
  bool advance() override;

  std::size_t posted() const { return next_; }
  bool exhausted() const { return next_ == events_.size(); }

 private:
  std::vector<ScenarioEvent> events_;
  Bridge& bridge_;
  VirtualClock& clock_;
  Trace& trace_;
  std::size_t next_ = 0;
};

}  // namespace svm
