#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>

#include "svm/bridge.hpp"
#include "svm/channel.hpp"
#include "svm/context.hpp"
#include "svm/event.hpp"
#include "svm/heap.hpp"
#include "svm/trace.hpp"

namespace svm {

struct SchedulerStats {
  std::uint64_t dispatches = 0;
  std::uint64_t rendezvous = 0;      // software pairs plus driver deliveries to blocked receivers
  std::uint64_t driver_reads = 0;
  std::uint64_t driver_writes = 0;
  std::uint64_t sleeps = 0;
  std::uint64_t wakes = 0;
  std::uint64_t messages = 0;        // driver messages consumed
  std::uint64_t dirty_discarded = 0;
  std::uint64_t wraps_entered = 0;   // non-identity wraps applied
};

enum class SyncResult {
  Completed,  // the caller keeps running
  Switched,   // a partner became current, the caller is ready
  Blocked,    // the caller waits in channel queues
};

/// Ready queue, cooperative dispatch and the synchronisation engine.
///
/// All state here belongs to the interpreter stream. The only way in from
/// outside is the bridge queue, which is drained at dispatch boundaries.
class Scheduler {
 public:
  Scheduler(ContextPool& contexts, ChannelTable& channels, Heap& heap, Bridge& bridge, Trace& trace);

  /// Called at every dispatch boundary before the bridge queue is drained.
  void set_boundary_hook(std::function<void()> hook) { boundary_hook_ = std::move(hook); }
  void set_step_counter(const std::uint64_t* steps) { steps_ = steps; }

  Context* current() const { return current_; }
  bool asleep() const { return asleep_; }
  const std::deque<ThreadId>& ready_queue() const { return ready_; }
  const SchedulerStats& stats() const { return stats_; }

  void make_ready(Context& ctx);
  /// The running context executed STOP: mark DONE and free its slot.
  void finish_current();

  SyncResult sync(Context& cur, Value events);
  std::optional<BaseEvent> find_synchronisable_event(Value events);
  void block(Context& cur, Value events);
  /// Next ready context, or nullptr when the VM goes to sleep.
  Context* dispatch_new_thread();
  SyncResult sync_now(const BaseEvent& ev, Context& cur);
  void wake_on_driver_msg(const DriverMessage& msg);

  /// Consume every message currently in the bridge queue.
  void drain_messages();

  /// Throws std::logic_error naming the first violated scheduler invariant.
  void check_invariants() const;

  /// Whether `tid` has a live (non-dirty) entry on a driver-bound channel.
  bool waits_on_driver(ThreadId tid) const;
  std::optional<ChannelId> first_wait_channel(ThreadId tid) const;

 private:
  void discard_dirty_front(std::deque<QueueEntry>& q);
  void deliver(Context& ctx, Value result, Value wrap);
  void retry_blocked_senders(DriverHandle& drv);
  std::uint64_t step_count() const { return steps_ ? *steps_ : 0; }

  ContextPool& contexts_;
  ChannelTable& channels_;
  Heap& heap_;
  Bridge& bridge_;
  Trace& trace_;

  std::deque<ThreadId> ready_;
  Context* current_ = nullptr;
  bool asleep_ = false;
  std::function<void()> boundary_hook_;
  const std::uint64_t* steps_ = nullptr;
  SchedulerStats stats_;
};

}  // namespace svm
