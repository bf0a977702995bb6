#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "svm/value.hpp"

namespace svm {

/// One two-field heap cell, packed to 12 bytes: both payload words, both
/// tags, and a byte of collector/event bits.
class HeapCell {
 public:
  static constexpr std::uint8_t kMark = 0x1;
  static constexpr std::uint8_t kDirty = 0x2;  // event dirty flag
  static constexpr std::uint8_t kPhase = 0x4;  // marking: 0 = back link in fst, 1 = in snd

  Value fst() const { return Value::from_raw(fst_tag_, fst_); }
  Value snd() const { return Value::from_raw(snd_tag_, snd_); }
  void set_fst(Value v) { fst_tag_ = v.tag(), fst_ = v.bits(); }
  void set_snd(Value v) { snd_tag_ = v.tag(), snd_ = v.bits(); }

  bool test(std::uint8_t bit) const { return (bits_ & bit) != 0; }
  void set(std::uint8_t bit, bool on) { bits_ = on ? (bits_ | bit) : (bits_ & ~bit); }

 private:
  friend class Heap;

  std::uint32_t fst_ = 0;
  std::uint32_t snd_ = 0;
  Tag fst_tag_ = Tag::Unit;
  Tag snd_tag_ = Tag::Unit;
  std::uint8_t bits_ = 0;
};

inline constexpr std::size_t kCellBytes = sizeof(HeapCell);
static_assert(kCellBytes == 12);

struct HeapStats {
  std::uint64_t allocations = 0;
  std::uint64_t collections = 0;
  std::uint64_t reclaimed = 0;     // free cells handed out by sweeps after a collection
  std::uint64_t peak_live = 0;
  std::uint64_t last_mark_steps = 0;
  std::uint64_t total_mark_steps = 0;
};

struct CollectionReport {
  std::size_t marked = 0;
  std::size_t free = 0;
  std::uint64_t mark_steps = 0;
};

/// Fixed-capacity cell heap. Mark phase is Deutsch-Schorr-Waite link
/// reversal; sweeping is lazy (Hughes): allocation advances a cursor and a
/// new mark only starts once the cursor has reached the end.
class Heap {
 public:
  using RootVisitor = std::function<void(Value)>;
  using RootEnumerator = std::function<void(const RootVisitor&)>;

  explicit Heap(std::size_t capacity_cells);

  static std::size_t cells_for_bytes(std::size_t bytes) { return bytes / kCellBytes; }

  std::size_t capacity() const { return cells_.size(); }
  std::size_t cursor() const { return cursor_; }
  const HeapStats& stats() const { return stats_; }

  void set_root_enumerator(RootEnumerator roots) { roots_ = std::move(roots); }
  void on_collection(std::function<void(const CollectionReport&)> hook) { collected_ = std::move(hook); }

  /// Allocate a cell initialised to (fst, snd). Collects when the sweep
  /// cursor is exhausted; throws OutOfMemory if that frees nothing.
  CellRef alloc(Value fst, Value snd);

  /// Mark everything reachable from `roots`. Requires all mark bits clear.
  /// Returns the number of newly marked cells.
  std::size_t mark(const std::vector<Value>& roots);
  std::size_t mark_from(Value root);

  /// Advance the lazy sweep cursor to the next unmarked cell, clearing the
  /// mark bits it passes. nullopt once the end of the heap is reached.
  std::optional<CellRef> sweep_next_free();

  /// Run a mark over the registered roots and rewind the cursor.
  CollectionReport collect();

  const HeapCell& cell(CellRef r) const { return cells_.at(r.index); }
  HeapCell& cell(CellRef r) { return cells_.at(r.index); }
  Value fst(CellRef r) const { return cell(r).fst(); }
  Value snd(CellRef r) const { return cell(r).snd(); }
  bool marked(CellRef r) const { return cell(r).test(HeapCell::kMark); }
  bool dirty(CellRef r) const { return cell(r).test(HeapCell::kDirty); }
  void set_dirty(CellRef r) { cell(r).set(HeapCell::kDirty, true); }

  /// Keeps values alive across allocations made by native code. Pins are
  /// released in LIFO order when the scope ends.
  class PinScope {
   public:
    explicit PinScope(Heap& heap) : heap_(heap), base_(heap.pins_.size()) {}
    ~PinScope() { heap_.pins_.resize(base_); }
    PinScope(const PinScope&) = delete;
    PinScope& operator=(const PinScope&) = delete;

    Value add(Value v) {
      heap_.pins_.push_back(v);
      return v;
    }

   private:
    Heap& heap_;
    std::size_t base_;
  };

 private:
  void mark_graph(CellRef root);

  std::vector<HeapCell> cells_;
  std::size_t cursor_ = 0;
  std::uint64_t live_estimate_ = 0;
  bool collected_once_ = false;
  std::vector<Value> pins_;
  RootEnumerator roots_;
  std::function<void(const CollectionReport&)> collected_;
  HeapStats stats_;
};

}  // namespace svm
