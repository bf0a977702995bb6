#include "svm/heap.hpp"

#include <algorithm>

#include "svm/error.hpp"

namespace svm {

namespace {
constexpr std::uint32_t kNoParent = 0xffff'ffffu;
}

Heap::Heap(std::size_t capacity_cells) : cells_(capacity_cells) {}

CellRef Heap::alloc(Value fst, Value snd) {
  auto slot = sweep_next_free();
  if (!slot) {
    PinScope pins(*this);
    pins.add(fst);
    pins.add(snd);
    collect();
    slot = sweep_next_free();
    if (!slot)
      throw Error(ErrorCode::OutOfMemory, "all " + std::to_string(capacity()) + " cells are live");
  }
  HeapCell& c = cells_[slot->index];
  c.set_fst(fst);
  c.set_snd(snd);
  c.bits_ = 0;
  ++stats_.allocations;
  ++live_estimate_;
  stats_.peak_live = std::max(stats_.peak_live, live_estimate_);
  return *slot;
}

std::optional<CellRef> Heap::sweep_next_free() {
  while (cursor_ < cells_.size()) {
    HeapCell& c = cells_[cursor_++];
    if (c.test(HeapCell::kMark)) {
      c.set(HeapCell::kMark, false);
      continue;
    }
    return CellRef{static_cast<std::uint32_t>(cursor_ - 1)};
  }
  return std::nullopt;
}

CollectionReport Heap::collect() {
  // Finish any sweep in progress so every mark bit is clear.
  while (sweep_next_free()) {
  }
  stats_.last_mark_steps = 0;
  std::size_t marked = 0;
  if (roots_) roots_([&](Value v) { marked += mark_from(v); });
  for (std::size_t i = 0; i < pins_.size(); ++i) marked += mark_from(pins_[i]);
  cursor_ = 0;

  CollectionReport report{marked, cells_.size() - marked, stats_.last_mark_steps};
  ++stats_.collections;
  stats_.reclaimed += report.free;
  stats_.total_mark_steps += report.mark_steps;
  live_estimate_ = marked;
  if (collected_) collected_(report);
  return report;
}

std::size_t Heap::mark(const std::vector<Value>& roots) {
  stats_.last_mark_steps = 0;
  std::size_t marked = 0;
  for (Value v : roots) marked += mark_from(v);
  return marked;
}

std::size_t Heap::mark_from(Value root) {
  if (!root.is_ref() || cells_.at(root.bits()).test(HeapCell::kMark)) return 0;
  std::size_t count = 0;

  // Deutsch-Schorr-Waite: the path back to the root is threaded through the
  // payload words of the cells on it; the phase bit says which field holds
  // the back link. Tags are never touched.
  std::uint32_t parent = kNoParent;
  std::uint32_t cur = root.bits();
  cells_[cur].set(HeapCell::kMark, true);
  cells_[cur].set(HeapCell::kPhase, false);
  ++count;

  auto descendable = [this](Tag tag, std::uint32_t target) {
    return is_heap_tag(tag) && !cells_[target].test(HeapCell::kMark);
  };

  for (;;) {
    ++stats_.last_mark_steps;
    HeapCell& c = cells_[cur];
    if (!c.test(HeapCell::kPhase)) {
      if (descendable(c.fst_tag_, c.fst_)) {
        std::uint32_t child = c.fst_;
        c.fst_ = parent;
        parent = cur;
        cur = child;
        cells_[cur].set(HeapCell::kMark, true);
        cells_[cur].set(HeapCell::kPhase, false);
        ++count;
        continue;
      }
      c.set(HeapCell::kPhase, true);
    }
    if (descendable(c.snd_tag_, c.snd_)) {
      std::uint32_t child = c.snd_;
      c.snd_ = parent;
      parent = cur;
      cur = child;
      cells_[cur].set(HeapCell::kMark, true);
      cells_[cur].set(HeapCell::kPhase, false);
      ++count;
      continue;
    }

    // Both fields done: retreat one link, restoring it.
    c.set(HeapCell::kPhase, false);
    if (parent == kNoParent) break;
    HeapCell& p = cells_[parent];
    std::uint32_t grandparent;
    if (!p.test(HeapCell::kPhase)) {
      grandparent = p.fst_;
      p.fst_ = cur;
    } else {
      grandparent = p.snd_;
      p.snd_ = cur;
    }
    cur = parent;
    parent = grandparent;
  }
  return count;
}

}  // namespace svm
