#include "svm/vm.hpp"

#include <stdexcept>

#include "svm/event.hpp"

namespace svm {

const char* to_string(ExitReason r) {
  switch (r) {
    case ExitReason::Halted: return "halted";
    case ExitReason::Quiescent: return "quiescent";
    case ExitReason::Deadlock: return "deadlock";
    case ExitReason::ResourceExhausted: return "exhausted";
    case ExitReason::MaxSteps: return "max_steps";
    case ExitReason::Fault: return "fault";
  }
  return "?";
}

int exit_code(ExitReason r) {
  switch (r) {
    case ExitReason::Halted:
    case ExitReason::Quiescent: return 0;
    case ExitReason::Deadlock: return 2;
    case ExitReason::ResourceExhausted: return 3;
    case ExitReason::MaxSteps: return 4;
    case ExitReason::Fault: return 1;
  }
  return 1;
}

namespace {

std::vector<Instruction> link_code(const Program& p) {
  p.validate();
  std::vector<Instruction> code = p.code;
  auto stub = compose_stub();
  code.insert(code.end(), stub.begin(), stub.end());
  return code;
}

CellRef expect_pair(Value v, const char* op) {
  if (!v.is(Tag::Pair)) throw Error(ErrorCode::TypeConfusion, std::string(op) + " on " + to_string(v));
  return v.as_cell();
}

std::int32_t expect_int(Value v, const char* op) {
  if (!v.is(Tag::Int)) throw Error(ErrorCode::TypeConfusion, std::string(op) + " on " + to_string(v));
  return v.as_int();
}

ChannelId expect_channel(Value v, const char* op) {
  if (!v.is(Tag::Channel)) throw Error(ErrorCode::TypeConfusion, std::string(op) + " on " + to_string(v));
  return v.as_channel();
}

// Wrapping 32-bit arithmetic.
std::int32_t wrap32(std::int64_t v) { return static_cast<std::int32_t>(static_cast<std::uint32_t>(v)); }

}  // namespace

Vm::Vm(Program program, RunConfig config)
    : config_((config.validate(), config)),
      pool_(std::move(program.pool)),
      code_(link_code(Program{pool_, program.code, program.entry})),
      compose_entry_(static_cast<std::uint32_t>(program.code.size())),
      trace_(&clock_),
      heap_(Heap::cells_for_bytes(config_.heap_bytes)),
      contexts_(config_.contexts, config_.stack_bytes),
      channels_(config_.channels, config_.chan_queue_cap),
      bridge_(config_.drivers, config_.queue_cap),
      scheduler_(contexts_, channels_, heap_, bridge_, trace_) {
  heap_.set_root_enumerator([this](const Heap::RootVisitor& visit) { enumerate_roots(visit); });
  heap_.on_collection([this](const CollectionReport& r) {
    trace_.emit("gc", {{"marked", std::to_string(r.marked)},
                       {"free", std::to_string(r.free)},
                       {"mark_steps", std::to_string(r.mark_steps)}});
  });
  scheduler_.set_step_counter(&steps_);

  Context& main = contexts_.create(program.entry, Value::unit());
  main_tid_ = main.tid();
  scheduler_.make_ready(main);
}

void Vm::enumerate_roots(const Heap::RootVisitor& visit) const {
  contexts_.for_each([&](const Context& c) {
    visit(c.env);
    for (Value v : c.stack()) visit(v);
  });
  for (const Channel& ch : channels_.all()) {
    for (const auto* q : {&ch.sendq, &ch.recvq}) {
      for (const QueueEntry& e : *q) {
        visit(Value::pair(e.record));
        visit(Value::pair(e.dirty));
      }
    }
  }
  for (const DriverHandle& d : bridge_.drivers())
    if (d.pending) visit(*d.pending);
  if (main_result_) visit(*main_result_);
}

Context& Vm::spawn_at(std::uint32_t pc, Value captured) {
  if (!contexts_.has_free_slot())
    throw Error(ErrorCode::NoFreeContext, "all " + std::to_string(contexts_.capacity()) + " context slots are occupied");
  Value env = Value::pair(heap_.alloc(captured, Value::unit()));
  Context& child = contexts_.create(pc, env);
  scheduler_.make_ready(child);
  return child;
}

ThreadId Vm::spawn(Value fn) {
  if (fn.is(Tag::Label)) {
    if (!contexts_.has_free_slot())
      throw Error(ErrorCode::NoFreeContext, "all " + std::to_string(contexts_.capacity()) + " context slots are occupied");
    Context& child = contexts_.create(fn.as_label(), Value::unit());
    scheduler_.make_ready(child);
    return child.tid();
  }
  if (!fn.is(Tag::Closure)) throw Error(ErrorCode::TypeConfusion, "spawn of " + to_string(fn));
  Heap::PinScope pins(heap_);
  pins.add(fn);
  CellRef c = fn.as_cell();
  return spawn_at(heap_.fst(c).as_label(), heap_.snd(c)).tid();
}

void Vm::finish(Context& ctx) {
  ThreadSummary s{ctx.steps, ctx.peak_depth(), ctx.completions, true};
  finished_[index_of(ctx.tid())] = s;
  if (ctx.tid() == main_tid_) main_result_ = ctx.env;
  scheduler_.finish_current();
}

StepOutcome Vm::step() {
  Context* cur = scheduler_.current();
  if (!cur) {
    if (contexts_.live() == 0) return StepOutcome::Halted;
    cur = scheduler_.dispatch_new_thread();
    if (!cur) return StepOutcome::AllAsleep;
  }
  if (scheduler_.asleep() || cur->state != ContextState::Running) ++steps_while_asleep_;

  if (cur->pc >= code_.size()) throw Error(ErrorCode::DanglingLabel, "pc " + std::to_string(cur->pc));
  const Instruction ins = code_[cur->pc];
  ++cur->pc;
  ++cur->steps;
  ++steps_;
  clock_.tick(config_.step_cost_ms);

  StepOutcome outcome = StepOutcome::Continued;
  execute(*cur, ins, outcome);
  if (outcome == StepOutcome::ContextFinished && contexts_.live() == 0) outcome = StepOutcome::Halted;
  if (observer_) observer_(*this);
  return outcome;
}

void Vm::execute(Context& ctx, const Instruction& ins, StepOutcome& outcome) {
  switch (ins.op) {
    case Op::Stop:
      finish(ctx);
      outcome = StepOutcome::ContextFinished;
      return;
    case Op::Fst:
      ctx.env = heap_.fst(expect_pair(ctx.env, "FST"));
      return;
    case Op::Snd:
      ctx.env = heap_.snd(expect_pair(ctx.env, "SND"));
      return;
    case Op::Acc:
    case Op::Rest: {
      Value v = ctx.env;
      for (std::uint16_t i = 0; i < ins.operand; ++i) v = heap_.fst(expect_pair(v, "ACC/REST"));
      ctx.env = ins.op == Op::Acc ? heap_.snd(expect_pair(v, "ACC")) : v;
      return;
    }
    case Op::Push:
      ctx.push(ctx.env);
      return;
    case Op::Swap: {
      Value top = ctx.pop();
      ctx.push(ctx.env);
      ctx.env = top;
      return;
    }
    case Op::LoadI:
      ctx.env = pool_.at(ins.operand);
      return;
    case Op::Clear:
      ctx.env = Value::unit();
      return;
    case Op::Cur:
      ctx.env = Value::closure(heap_.alloc(Value::label(ins.operand), ctx.env));
      return;
    case Op::Comb:
      ctx.env = Value::label(ins.operand);
      return;
    case Op::App: {
      CellRef fx = expect_pair(ctx.env, "APP");
      Value fn = heap_.fst(fx);
      Value arg = heap_.snd(fx);
      ctx.push(Value::label(ctx.pc));
      apply_closure(ctx, heap_, fn, arg);
      return;
    }
    case Op::Return: {
      if (ctx.stack_empty()) {
        finish(ctx);
        outcome = StepOutcome::ContextFinished;
        return;
      }
      Value ret = ctx.pop();
      if (!ret.is(Tag::Label)) throw Error(ErrorCode::TypeConfusion, "RETURN to " + to_string(ret));
      ctx.pc = ret.as_label();
      return;
    }
    case Op::Call:
      ctx.push(Value::label(ctx.pc));
      ctx.pc = ins.operand;
      return;
    case Op::Goto:
      ctx.pc = ins.operand;
      return;
    case Op::GotoFalse: {
      if (!ctx.env.is(Tag::Bool)) throw Error(ErrorCode::TypeConfusion, "GOTOFALSE on " + to_string(ctx.env));
      bool taken = !ctx.env.as_bool();
      ctx.env = ctx.pop();
      if (taken) ctx.pc = ins.operand;
      return;
    }
    case Op::Cons: {
      Value head = ctx.top();
      ctx.env = Value::pair(heap_.alloc(head, ctx.env));
      ctx.pop();
      return;
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Lt: {
      std::int64_t a = expect_int(ctx.top(), "arithmetic");
      std::int64_t b = expect_int(ctx.env, "arithmetic");
      ctx.pop();
      switch (ins.op) {
        case Op::Add: ctx.env = Value::integer(wrap32(a + b)); break;
        case Op::Sub: ctx.env = Value::integer(wrap32(a - b)); break;
        case Op::Mul: ctx.env = Value::integer(wrap32(a * b)); break;
        default: ctx.env = Value::boolean(a < b); break;
      }
      return;
    }
    case Op::Eq: {
      Value a = ctx.top();
      Value b = ctx.env;
      if (a.is_ref() || b.is_ref() || a.tag() != b.tag())
        throw Error(ErrorCode::TypeConfusion, "EQ on " + to_string(a) + " and " + to_string(b));
      ctx.pop();
      ctx.env = Value::boolean(a == b);
      return;
    }
    case Op::Channel:
      ctx.env = Value::channel(channels_.create());
      return;
    case Op::SendEvt: {
      ChannelId ch = expect_channel(ctx.top(), "SENDEVT");
      ctx.env = send_evt(heap_, channels_, ch, ctx.env);
      ctx.pop();
      return;
    }
    case Op::RecvEvt:
      ctx.env = recv_evt(heap_, channels_, expect_channel(ctx.env, "RECVEVT"));
      return;
    case Op::Choose: {
      Value e1 = ctx.top();
      ctx.env = choose(heap_, e1, ctx.env);
      ctx.pop();
      return;
    }
    case Op::Wrap: {
      Value e = ctx.top();
      ctx.env = wrap(heap_, e, ctx.env, compose_entry_);
      ctx.pop();
      return;
    }
    case Op::Sync: {
      SyncResult r = scheduler_.sync(ctx, ctx.env);
      if (r == SyncResult::Blocked) outcome = StepOutcome::ContextBlocked;
      return;
    }
    case Op::Spawn: {
      Context& child = spawn_at(ins.operand, ctx.env);
      trace_.emit("spawn", {{"tid", to_string(child.tid())}, {"parent", to_string(ctx.tid())}});
      ctx.env = Value::thread(child.tid());
      return;
    }
    case Op::SpawnX: {
      ChannelId ch = expect_channel(ctx.env, "SPAWNX");
      if (ins.operand >= config_.drivers)
        throw Error(ErrorCode::UnknownDriver, "driver " + std::to_string(ins.operand) + " beyond the " +
                                                  std::to_string(config_.drivers) + " configured slots");
      ThreadId ext = bridge_.spawn_external(channels_, ch, DriverId{ins.operand});
      trace_.emit("spawn", {{"tid", to_string(ext)}, {"parent", to_string(ctx.tid())}});
      ctx.env = Value::thread(ext);
      return;
    }
  }
  throw Error(ErrorCode::UnknownOpcode, "opcode " + std::to_string(static_cast<int>(ins.op)));
}

RunReport Vm::classify_sleep() {
  RunReport report;
  report.reason = ExitReason::Quiescent;
  contexts_.for_each([&](const Context& c) {
    if (c.state != ContextState::Blocked || scheduler_.waits_on_driver(c.tid())) return;
    report.reason = ExitReason::Deadlock;
    report.stuck.emplace_back(c.tid(), scheduler_.first_wait_channel(c.tid()));
  });
  for (const auto& [tid, ch] : report.stuck)
    trace_.emit("deadlock", {{"tid", to_string(tid)}, {"ch", ch ? std::to_string(index_of(*ch)) : "none"}});
  return report;
}

RunReport Vm::run(ExternalSource* source) {
  if (source) scheduler_.set_boundary_hook([source] { source->post_due(); });
  RunReport report;
  try {
    for (;;) {
      if (config_.max_steps && steps_ >= *config_.max_steps) {
        report.reason = ExitReason::MaxSteps;
        break;
      }
      StepOutcome out = step();
      if (out == StepOutcome::Halted) {
        report.reason = ExitReason::Halted;
        break;
      }
      if (out == StepOutcome::AllAsleep) {
        if (source && source->advance()) continue;
        report = classify_sleep();
        break;
      }
    }
  } catch (const Error& e) {
    report.reason = is_resource_exhaustion(e.code()) ? ExitReason::ResourceExhausted : ExitReason::Fault;
    report.error = e.code();
    report.message = e.what();
  }
  scheduler_.set_boundary_hook(nullptr);
  report.steps = steps_;
  trace_.emit("halt", {{"reason", to_string(report.reason)}, {"steps", std::to_string(steps_)}});
  return report;
}

std::map<std::uint32_t, ThreadSummary> Vm::threads() const {
  auto out = finished_;
  contexts_.for_each([&](const Context& c) {
    out[index_of(c.tid())] = ThreadSummary{c.steps, c.peak_depth(), c.completions, false};
  });
  return out;
}

void Vm::check_invariants() const {
  scheduler_.check_invariants();
  std::uint64_t total = 0;
  for (const auto& [tid, s] : threads()) total += s.steps;
  if (total != steps_) throw std::logic_error("vm invariant: per-thread step counters do not sum to the total");
  if (steps_while_asleep_ != 0) throw std::logic_error("vm invariant: instructions ran while asleep");
  contexts_.for_each([](const Context& c) {
    if (c.depth() > c.stack_limit()) throw std::logic_error("vm invariant: stack beyond its budget");
  });
}

}  // namespace svm
