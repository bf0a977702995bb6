#include "svm/scheduler.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "svm/error.hpp"

namespace svm {

namespace {

EventKind partner_kind(EventKind k) { return k == EventKind::Send ? EventKind::Recv : EventKind::Send; }

std::string chan_str(ChannelId c) { return std::to_string(index_of(c)); }

}  // namespace

Scheduler::Scheduler(ContextPool& contexts, ChannelTable& channels, Heap& heap, Bridge& bridge, Trace& trace)
    : contexts_(contexts), channels_(channels), heap_(heap), bridge_(bridge), trace_(trace) {}

void Scheduler::make_ready(Context& ctx) {
  ctx.state = ContextState::Ready;
  ready_.push_back(ctx.tid());
}

void Scheduler::finish_current() {
  Context* ctx = current_;
  ctx->state = ContextState::Done;
  trace_.emit("finish", {{"tid", to_string(ctx->tid())}});
  current_ = nullptr;
  contexts_.release(*ctx);
}

void Scheduler::discard_dirty_front(std::deque<QueueEntry>& q) {
  while (!q.empty() && heap_.dirty(q.front().dirty)) {
    q.pop_front();
    ++stats_.dirty_discarded;
  }
}

SyncResult Scheduler::sync(Context& cur, Value events) {
  if (!events.is(Tag::Event) && !events.is(Tag::Unit))
    throw Error(ErrorCode::TypeConfusion, "sync on " + to_string(events));
  Heap::PinScope pins(heap_);
  pins.add(events);
  if (auto ev = find_synchronisable_event(events)) return sync_now(*ev, cur);
  block(cur, events);
  dispatch_new_thread();
  return SyncResult::Blocked;
}

std::optional<BaseEvent> Scheduler::find_synchronisable_event(Value events) {
  for (CellRef rec : event_records(heap_, events)) {
    BaseEvent ev = read_base_event(heap_, rec);
    Channel& ch = channels_.at(ev.channel);
    if (ch.driver) {
      const DriverHandle& d = bridge_.driver(*ch.driver);
      auto avail = ev.kind == EventKind::Send ? ll_data_writeable(d) : ll_data_readable(d);
      if (avail > 0) return ev;
      continue;
    }
    auto& partners = ch.queue(partner_kind(ev.kind));
    discard_dirty_front(partners);
    if (!partners.empty()) return ev;
  }
  return std::nullopt;
}

void Scheduler::block(Context& cur, Value events) {
  auto records = event_records(heap_, events);
  // One flag for the whole attempt; the event list stays reachable from env.
  CellRef flag = heap_.alloc(Value::unit(), Value::unit());
  for (CellRef rec : records) {
    BaseEvent ev = read_base_event(heap_, rec);
    auto& q = channels_.at(ev.channel).queue(ev.kind);
    if (q.size() >= channels_.queue_capacity()) {
      stats_.dirty_discarded += std::erase_if(q, [this](const QueueEntry& e) { return heap_.dirty(e.dirty); });
      if (q.size() >= channels_.queue_capacity())
        throw Error(ErrorCode::ChannelQueueFull, "channel " + chan_str(ev.channel) + " " + to_string(ev.kind) +
                                                     " queue holds " + std::to_string(q.size()) + " entries");
    }
    q.push_back(QueueEntry{cur.tid(), rec, flag});
  }
  cur.state = ContextState::Blocked;
  trace_.emit("block", {{"tid", to_string(cur.tid())}, {"entries", std::to_string(records.size())}});
  if (current_ == &cur) current_ = nullptr;
}

Context* Scheduler::dispatch_new_thread() {
  if (boundary_hook_) boundary_hook_();
  drain_messages();
  while (!ready_.empty()) {
    ThreadId tid = ready_.front();
    ready_.pop_front();
    Context* next = contexts_.find(tid);
    if (!next) continue;
    next->state = ContextState::Running;
    current_ = next;
    asleep_ = false;
    ++stats_.dispatches;
    trace_.emit("dispatch", {{"tid", to_string(tid)}});
    return next;
  }
  current_ = nullptr;
  if (!asleep_ && contexts_.live() > 0) {
    asleep_ = true;
    ++stats_.sleeps;
    trace_.emit("sleep", {{"steps", std::to_string(step_count())}});
  }
  return nullptr;
}

void Scheduler::deliver(Context& ctx, Value result, Value wrap) {
  ++ctx.completions;
  if (wrap.is(Tag::Identity)) {
    ctx.env = result;
    return;
  }
  // Run the wrap in this context and come back to the instruction after SYNC.
  ctx.push(Value::label(ctx.pc));
  Value entry = wrap.is(Tag::Closure) ? heap_.fst(wrap.as_cell()) : wrap;
  ++stats_.wraps_entered;
  trace_.emit("wrap", {{"tid", to_string(ctx.tid())}, {"entry", std::to_string(entry.as_label())}});
  apply_closure(ctx, heap_, wrap, result);
}

SyncResult Scheduler::sync_now(const BaseEvent& ev, Context& cur) {
  Heap::PinScope pins(heap_);
  pins.add(ev.message);
  pins.add(ev.wrap);
  Channel& ch = channels_.at(ev.channel);

  if (ch.driver) {
    DriverHandle& d = bridge_.driver(*ch.driver);
    if (ev.kind == EventKind::Send) {
      ll_write(d, ev.message);
      ++stats_.driver_writes;
      trace_.emit("drv_write", {{"drv", std::to_string(index_of(d.id))}, {"ch", chan_str(ev.channel)}, {"val", to_string(ev.message)}});
      deliver(cur, Value::unit(), ev.wrap);
    } else {
      Value v = pins.add(ll_read(d));
      ++stats_.driver_reads;
      trace_.emit("drv_read", {{"drv", std::to_string(index_of(d.id))}, {"ch", chan_str(ev.channel)}, {"val", to_string(v)}});
      deliver(cur, v, ev.wrap);
    }
    return SyncResult::Completed;
  }

  auto& partners = ch.queue(partner_kind(ev.kind));
  QueueEntry partner = partners.front();
  partners.pop_front();
  heap_.set_dirty(partner.dirty);
  Context* other = contexts_.find(partner.tid);
  if (!other) throw std::logic_error("queue entry for a finished thread");
  BaseEvent theirs = read_base_event(heap_, partner.record);
  pins.add(theirs.message);
  pins.add(theirs.wrap);
  ++stats_.rendezvous;

  if (ev.kind == EventKind::Send) {
    trace_.emit("rendezvous", {{"ch", chan_str(ev.channel)},
                               {"sender", to_string(cur.tid())},
                               {"receiver", to_string(other->tid())},
                               {"msg", to_string(ev.message)}});
    deliver(*other, ev.message, theirs.wrap);
    deliver(cur, Value::unit(), ev.wrap);
    // The receiver runs next; the sender waits its turn.
    make_ready(cur);
    other->state = ContextState::Running;
    current_ = other;
    ++stats_.dispatches;
    trace_.emit("dispatch", {{"tid", to_string(other->tid())}});
    return SyncResult::Switched;
  }

  trace_.emit("rendezvous", {{"ch", chan_str(ev.channel)},
                             {"sender", to_string(other->tid())},
                             {"receiver", to_string(cur.tid())},
                             {"msg", to_string(theirs.message)}});
  deliver(cur, theirs.message, ev.wrap);
  deliver(*other, Value::unit(), theirs.wrap);
  make_ready(*other);
  return SyncResult::Completed;
}

void Scheduler::drain_messages() {
  while (auto msg = bridge_.queue().try_take()) wake_on_driver_msg(*msg);
}

void Scheduler::wake_on_driver_msg(const DriverMessage& msg) {
  ++stats_.messages;
  if (asleep_) {
    asleep_ = false;
    ++stats_.wakes;
    trace_.emit("wake", {{"steps", std::to_string(step_count())}});
  }
  DriverHandle& d = bridge_.driver(msg.driver);
  const std::string drv = std::to_string(index_of(d.id));

  if (msg.kind == MessageKind::Drain) {
    d.device->drain(static_cast<std::uint32_t>(msg.payload.as_int()));
    retry_blocked_senders(d);
    return;
  }

  if (d.bound) {
    auto& receivers = channels_.at(*d.bound).recvq;
    discard_dirty_front(receivers);
    if (!receivers.empty()) {
      QueueEntry entry = receivers.front();
      receivers.pop_front();
      heap_.set_dirty(entry.dirty);
      Context* ctx = contexts_.find(entry.tid);
      if (!ctx) throw std::logic_error("queue entry for a finished thread");
      BaseEvent ev = read_base_event(heap_, entry.record);
      Heap::PinScope pins(heap_);
      pins.add(ev.wrap);
      pins.add(msg.payload);
      ++stats_.rendezvous;
      trace_.emit("rendezvous", {{"ch", chan_str(*d.bound)},
                                 {"sender", to_string(external_thread(d.id))},
                                 {"receiver", to_string(ctx->tid())},
                                 {"msg", to_string(msg.payload)}});
      deliver(*ctx, msg.payload, ev.wrap);
      make_ready(*ctx);
      return;
    }
  }
  if (bridge_.latch(d.id, msg.payload)) {
    trace_.emit("latch", {{"drv", drv}, {"val", to_string(msg.payload)}});
  } else {
    trace_.emit("drop", {{"drv", drv}, {"val", to_string(msg.payload)}, {"where", "slot"}});
  }
}

void Scheduler::retry_blocked_senders(DriverHandle& drv) {
  if (!drv.bound) return;
  auto& senders = channels_.at(*drv.bound).sendq;
  for (;;) {
    discard_dirty_front(senders);
    if (senders.empty() || ll_data_writeable(drv) == 0) return;
    QueueEntry entry = senders.front();
    senders.pop_front();
    heap_.set_dirty(entry.dirty);
    Context* ctx = contexts_.find(entry.tid);
    if (!ctx) throw std::logic_error("queue entry for a finished thread");
    BaseEvent ev = read_base_event(heap_, entry.record);
    Heap::PinScope pins(heap_);
    pins.add(ev.wrap);
    ll_write(drv, ev.message);
    ++stats_.driver_writes;
    trace_.emit("drv_write", {{"drv", std::to_string(index_of(drv.id))}, {"ch", chan_str(*drv.bound)}, {"val", to_string(ev.message)}});
    deliver(*ctx, Value::unit(), ev.wrap);
    make_ready(*ctx);
  }
}

bool Scheduler::waits_on_driver(ThreadId tid) const {
  for (const Channel& ch : channels_.all()) {
    if (!ch.driver) continue;
    for (const auto* q : {&ch.sendq, &ch.recvq})
      for (const QueueEntry& e : *q)
        if (e.tid == tid && !heap_.dirty(e.dirty)) return true;
  }
  return false;
}

std::optional<ChannelId> Scheduler::first_wait_channel(ThreadId tid) const {
  for (const Channel& ch : channels_.all())
    for (const auto* q : {&ch.sendq, &ch.recvq})
      for (const QueueEntry& e : *q)
        if (e.tid == tid && !heap_.dirty(e.dirty)) return ch.id;
  return std::nullopt;
}

void Scheduler::check_invariants() const {
  auto fail = [](const std::string& what) { throw std::logic_error("scheduler invariant: " + what); };

  std::size_t running = 0;
  contexts_.for_each([&](const Context& c) {
    if (c.state == ContextState::Running) {
      ++running;
      if (&c != current_) fail("running context is not current");
    }
    if (c.state == ContextState::Done) fail("finished context still occupies a slot");
  });
  if (running > 1) fail("more than one running context");
  if (current_ && current_->state != ContextState::Running) fail("current context is not RUNNING");
  if (asleep_ && !ready_.empty()) fail("asleep with a non-empty ready queue");

  std::set<std::uint32_t> ready;
  for (ThreadId t : ready_) {
    if (!ready.insert(index_of(t)).second) fail("thread queued twice on readyQ");
    const Context* c = contexts_.find(t);
    if (!c || c->state != ContextState::Ready) fail("readyQ holds a thread that is not READY");
  }

  for (const Channel& ch : channels_.all()) {
    std::set<std::uint32_t> senders, receivers;
    for (const QueueEntry& e : ch.sendq)
      if (!heap_.dirty(e.dirty)) senders.insert(index_of(e.tid));
    for (const QueueEntry& e : ch.recvq)
      if (!heap_.dirty(e.dirty)) receivers.insert(index_of(e.tid));
    for (auto tid : senders) {
      if (ready.count(tid)) fail("thread both ready and queued on channel " + chan_str(ch.id));
      const Context* c = contexts_.find(ThreadId{tid});
      if (!c || c->state != ContextState::Blocked) fail("live send entry for a thread that is not BLOCKED");
    }
    for (auto tid : receivers) {
      if (ready.count(tid)) fail("thread both ready and queued on channel " + chan_str(ch.id));
      const Context* c = contexts_.find(ThreadId{tid});
      if (!c || c->state != ContextState::Blocked) fail("live recv entry for a thread that is not BLOCKED");
    }
    if (ch.driver) {
      if (!senders.empty() && !receivers.empty()) fail("driver channel holds both senders and receivers");
      continue;
    }
    // A matchable pair from two different threads would have rendezvoused.
    for (auto s : senders)
      for (auto r : receivers)
        if (s != r) fail("unmatched rendezvous pending on channel " + chan_str(ch.id));
  }
}

}  // namespace svm
