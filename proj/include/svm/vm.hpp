#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svm/bridge.hpp"
#include "svm/channel.hpp"
#include "svm/clock.hpp"
#include "svm/config.hpp"
#include "svm/context.hpp"
#include "svm/error.hpp"
#include "svm/heap.hpp"
#include "svm/program.hpp"
#include "svm/scheduler.hpp"
#include "svm/trace.hpp"

namespace svm {

enum class StepOutcome { Continued, ContextBlocked, ContextFinished, AllAsleep, Halted };

enum class ExitReason { Halted, Quiescent, Deadlock, ResourceExhausted, MaxSteps, Fault };

const char* to_string(ExitReason r);
int exit_code(ExitReason r);

/// Producer of driver messages in virtual time (the scenario engine).
class ExternalSource {
 public:
  virtual ~ExternalSource() = default;
  /// Post every event due at or before the current virtual time.
  virtual void post_due() = 0;
  /// Jump the clock to the next pending event and post what is due.
  /// false once nothing is left.
  virtual bool advance() = 0;
};

struct ThreadSummary {
  std::uint64_t steps = 0;
  std::size_t peak_stack = 0;  // entries
  std::uint64_t completions = 0;
  bool done = false;
};

struct RunReport {
  ExitReason reason = ExitReason::Halted;
  std::uint64_t steps = 0;
  std::optional<ErrorCode> error;
  std::string message;
  // Blocked threads and the first channel each waits on, for Deadlock.
  std::vector<std::pair<ThreadId, std::optional<ChannelId>>> stuck;
};

class Vm {
 public:
  Vm(Program program, RunConfig config);
  Vm(const Vm&) = delete;
  Vm& operator=(const Vm&) = delete;

  StepOutcome step();
  /// Run to a terminal state. Module errors are caught and reported.
  RunReport run(ExternalSource* source = nullptr);

  /// Start `fn` (a closure or combinator label) applied to () in a new
  /// context, queued behind the current ready threads.
  ThreadId spawn(Value fn);

  /// Called after every executed instruction.
  void set_step_observer(std::function<void(const Vm&)> fn) { observer_ = std::move(fn); }

  const RunConfig& config() const { return config_; }
  const std::vector<Instruction>& code() const { return code_; }
  std::uint32_t compose_entry() const { return compose_entry_; }
  const std::vector<Value>& pool() const { return pool_; }

  VirtualClock& clock() { return clock_; }
  const VirtualClock& clock() const { return clock_; }
  Trace& trace() { return trace_; }
  const Trace& trace() const { return trace_; }
  Heap& heap() { return heap_; }
  const Heap& heap() const { return heap_; }
  ContextPool& contexts() { return contexts_; }
  const ContextPool& contexts() const { return contexts_; }
  ChannelTable& channels() { return channels_; }
  const ChannelTable& channels() const { return channels_; }
  Bridge& bridge() { return bridge_; }
  const Bridge& bridge() const { return bridge_; }
  Scheduler& scheduler() { return scheduler_; }
  const Scheduler& scheduler() const { return scheduler_; }

  std::uint64_t steps() const { return steps_; }
  /// Instructions executed with no RUNNING context. Zero by construction.
  std::uint64_t steps_while_asleep() const { return steps_while_asleep_; }
  /// Final env of the main thread once it has finished.
  std::optional<Value> main_result() const { return main_result_; }
  /// Per-thread counters, finished threads included.
  std::map<std::uint32_t, ThreadSummary> threads() const;

  /// Throws std::logic_error on any broken VM or scheduler invariant.
  void check_invariants() const;

 private:
  void execute(Context& ctx, const Instruction& ins, StepOutcome& outcome);
  void finish(Context& ctx);
  Context& spawn_at(std::uint32_t pc, Value captured);
  void enumerate_roots(const Heap::RootVisitor& visit) const;
  RunReport classify_sleep();

  RunConfig config_;
  std::vector<Value> pool_;
  std::vector<Instruction> code_;
  std::uint32_t compose_entry_;

  VirtualClock clock_;
  Trace trace_;
  Heap heap_;
  ContextPool contexts_;
  ChannelTable channels_;
  Bridge bridge_;
  Scheduler scheduler_;

  std::uint64_t steps_ = 0;
  std::uint64_t steps_while_asleep_ = 0;
  ThreadId main_tid_{};
  std::optional<Value> main_result_;
  std::map<std::uint32_t, ThreadSummary> finished_;
  std::function<void(const Vm&)> observer_;
};

}  // namespace svm
