#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "svm/heap.hpp"
#include "svm/value.hpp"

namespace svm {

enum class ContextState : std::uint8_t { Ready, Running, Blocked, Done };

const char* to_string(ContextState s);

/// A lightweight thread: environment register, value stack, program counter.
class Context {
 public:
  Context(ThreadId tid, std::size_t slot, std::size_t stack_bytes, std::uint32_t pc, Value env);

  ThreadId tid() const { return tid_; }
  std::size_t slot() const { return slot_; }

  Value env = Value::unit();
  std::uint32_t pc = 0;
  ContextState state = ContextState::Ready;
  std::uint64_t steps = 0;        // instructions executed by this context
  std::uint64_t completions = 0;  // sync operations completed (wrap entered)

  void push(Value v);
  Value pop();
  Value top() const;
  bool stack_empty() const { return stack_.empty(); }
  std::size_t depth() const { return stack_.size(); }
  std::size_t peak_depth() const { return peak_depth_; }
  std::size_t stack_limit() const { return limit_; }
  const std::vector<Value>& stack() const { return stack_; }

 private:
  ThreadId tid_;
  std::size_t slot_;
  std::size_t limit_;  // entries
  std::size_t peak_depth_ = 0;
  std::vector<Value> stack_;
};

/// Fixed number of context slots. Thread ids increase monotonically while
/// slots are reused once a context finishes.
class ContextPool {
 public:
  ContextPool(std::size_t slots, std::size_t stack_bytes);

  std::size_t capacity() const { return slots_.size(); }
  std::size_t live() const;
  bool has_free_slot() const;

  /// Occupy a free slot; throws NoFreeContext when none is left.
  Context& create(std::uint32_t pc, Value env);
  void release(Context& ctx);

  Context* find(ThreadId tid);
  const Context* find(ThreadId tid) const;

  void for_each(const std::function<void(Context&)>& fn);
  void for_each(const std::function<void(const Context&)>& fn) const;

 private:
  std::vector<std::optional<Context>> slots_;
  std::size_t stack_bytes_;
  std::uint32_t next_tid_ = 0;
};

/// CAM application of `fn` (a Closure or a combinator Label) to `arg`
/// inside `ctx`: a closure gets env := (captured env, arg), a combinator
/// gets env := arg; pc moves to the code entry. The caller pushes any
/// return address first. TypeConfusion for anything else.
void apply_closure(Context& ctx, Heap& heap, Value fn, Value arg);

}  // namespace svm
