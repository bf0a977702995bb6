#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "svm/heap.hpp"
#include "svm/value.hpp"

namespace svm {

enum class EventKind : std::uint8_t { Send = 0, Recv = 1 };

const char* to_string(EventKind k);

/// A blocked thread's interest in one base event. `dirty` is the flag cell
/// shared by every entry of the same sync attempt.
struct QueueEntry {
  ThreadId tid;
  CellRef record;
  CellRef dirty;
};

struct Channel {
  ChannelId id{};
  std::deque<QueueEntry> sendq;
  std::deque<QueueEntry> recvq;
  std::optional<DriverId> driver;

  std::deque<QueueEntry>& queue(EventKind k) { return k == EventKind::Send ? sendq : recvq; }
  const std::deque<QueueEntry>& queue(EventKind k) const { return k == EventKind::Send ? sendq : recvq; }
};

class ChannelTable {
 public:
  /// Bytes of channel arena charged per channel slot.
  static constexpr std::size_t kChannelBytes = 96;

  ChannelTable(std::size_t capacity, std::size_t queue_capacity);

  /// Next id counting from 0; NoFreeChannel when the table is full.
  ChannelId create();

  Channel& at(ChannelId id);
  const Channel& at(ChannelId id) const;
  bool contains(ChannelId id) const { return index_of(id) < channels_.size(); }

  std::size_t capacity() const { return capacity_; }
  std::size_t used() const { return channels_.size(); }
  std::size_t queue_capacity() const { return queue_capacity_; }
  std::size_t arena_bytes() const { return capacity_ * kChannelBytes; }
  std::size_t used_bytes() const { return used() * kChannelBytes; }

  std::vector<Channel>& all() { return channels_; }
  const std::vector<Channel>& all() const { return channels_; }

 private:
  std::size_t capacity_;
  std::size_t queue_capacity_;
  std::vector<Channel> channels_;
};

}  // namespace svm
