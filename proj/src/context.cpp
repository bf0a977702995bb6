#include "svm/context.hpp"

#include <algorithm>

#include "svm/error.hpp"

namespace svm {

const char* to_string(ContextState s) {
  switch (s) {
    case ContextState::Ready: return "READY";
    case ContextState::Running: return "RUNNING";
    case ContextState::Blocked: return "BLOCKED";
    case ContextState::Done: return "DONE";
  }
  return "?";
}

Context::Context(ThreadId tid, std::size_t slot, std::size_t stack_bytes, std::uint32_t pc_, Value env_)
    : env(env_), pc(pc_), tid_(tid), slot_(slot), limit_(stack_bytes / kValueBytes) {
  stack_.reserve(limit_);
}

void Context::push(Value v) {
  if (stack_.size() >= limit_)
    throw Error(ErrorCode::StackOverflow, "thread " + to_string(tid_) + " exceeds " +
                                              std::to_string(limit_ * kValueBytes) + " stack bytes");
  stack_.push_back(v);
  peak_depth_ = std::max(peak_depth_, stack_.size());
}

Value Context::pop() {
  if (stack_.empty()) throw Error(ErrorCode::StackUnderflow, "thread " + to_string(tid_) + " pops an empty stack");
  Value v = stack_.back();
  stack_.pop_back();
  return v;
}

Value Context::top() const {
  if (stack_.empty()) throw Error(ErrorCode::StackUnderflow, "thread " + to_string(tid_) + " reads an empty stack");
  return stack_.back();
}

ContextPool::ContextPool(std::size_t slots, std::size_t stack_bytes)
    : slots_(slots), stack_bytes_(stack_bytes) {}

std::size_t ContextPool::live() const {
  return static_cast<std::size_t>(std::count_if(slots_.begin(), slots_.end(), [](const auto& s) { return s.has_value(); }));
}

bool ContextPool::has_free_slot() const {
  return std::any_of(slots_.begin(), slots_.end(), [](const auto& s) { return !s.has_value(); });
}

Context& ContextPool::create(std::uint32_t pc, Value env) {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (!slots_[i]) {
      slots_[i].emplace(ThreadId{next_tid_++}, i, stack_bytes_, pc, env);
      return *slots_[i];
    }
  }
  throw Error(ErrorCode::NoFreeContext, "all " + std::to_string(slots_.size()) + " context slots are occupied");
}

void ContextPool::release(Context& ctx) { slots_.at(ctx.slot()).reset(); }

Context* ContextPool::find(ThreadId tid) {
  for (auto& s : slots_)
    if (s && s->tid() == tid) return &*s;
  return nullptr;
}

const Context* ContextPool::find(ThreadId tid) const {
  for (const auto& s : slots_)
    if (s && s->tid() == tid) return &*s;
  return nullptr;
}

void ContextPool::for_each(const std::function<void(Context&)>& fn) {
  for (auto& s : slots_)
    if (s) fn(*s);
}

void ContextPool::for_each(const std::function<void(const Context&)>& fn) const {
  for (const auto& s : slots_)
    if (s) fn(*s);
}

void apply_closure(Context& ctx, Heap& heap, Value fn, Value arg) {
  if (fn.is(Tag::Label)) {
    ctx.env = arg;
    ctx.pc = fn.as_label();
    return;
  }
  if (!fn.is(Tag::Closure)) throw Error(ErrorCode::TypeConfusion, "cannot apply " + to_string(fn));
  Heap::PinScope pins(heap);
  pins.add(fn);
  pins.add(arg);
  Value code = heap.fst(fn.as_cell());
  Value captured = heap.snd(fn.as_cell());
  CellRef env = heap.alloc(captured, arg);
  ctx.env = Value::pair(env);
  ctx.pc = code.as_label();
}

}  // namespace svm
