#pragma once

#include <cstdint>
#include <vector>

#include "svm/channel.hpp"
#include "svm/heap.hpp"
#include "svm/program.hpp"
#include "svm/value.hpp"

namespace svm {

// Heap layout of an event value. The list spine is a chain of cells
//
//   node = (Pair record, rest)          rest = Event node | Unit
//
// and each base-event record is a nested tuple of three cells
//
//   record = (message, Pair b)   b = (Channel, Pair c)   c = (Int kind, wrap)
//
// where wrap is Identity or something APP accepts. Unit is the empty event.
inline constexpr std::size_t kCellsPerBaseEvent = 4;  // one spine cell + three record cells

struct BaseEvent {
  CellRef record;
  Value message;
  ChannelId channel;
  EventKind kind;
  Value wrap;
};

BaseEvent read_base_event(const Heap& heap, CellRef record);

/// Records of an event list in list order. TypeConfusion if `list` is not
/// an event value.
std::vector<CellRef> event_records(const Heap& heap, Value list);

Value send_evt(Heap& heap, const ChannelTable& channels, ChannelId chan, Value message);
Value recv_evt(Heap& heap, const ChannelTable& channels, ChannelId chan);

/// e1 ++ e2. Records are shared; only e1's spine is copied.
Value choose(Heap& heap, Value e1, Value e2);

/// Compose `fn` after every record's wrap. Records are copied so `e`
/// itself is unchanged; identity wraps become `fn` directly.
Value wrap(Heap& heap, Value e, Value fn, std::uint32_t compose_entry);

/// Closure computing outer(inner(x)), run by the composition stub.
Value compose(Heap& heap, Value outer, Value inner, std::uint32_t compose_entry);

/// Code the VM appends after the user program to run composed wraps.
/// On entry env = ((outer, inner), x).
std::vector<Instruction> compose_stub();

}  // namespace svm
