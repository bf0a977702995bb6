#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "svm/channel.hpp"
#include "svm/value.hpp"

namespace svm {

/// The device side of a driver. Synchronous devices can be sampled and
/// written at any time; asynchronous ones deliver data through messages.
class Peripheral {
 public:
  virtual ~Peripheral() = default;

  virtual std::string_view kind() const = 0;
  virtual bool synchronous() const = 0;
  /// Current state of a synchronous device.
  virtual Value sample() const { return Value::unit(); }
  /// How many more writes the device accepts right now.
  virtual std::uint32_t free_space() const = 0;
  /// Precondition: free_space() > 0.
  virtual void accept(Value v) = 0;
  /// Device-side progress such as a UART draining its transmit buffer.
  virtual void drain(std::uint32_t /*count*/) {}
};

enum class MessageKind : std::uint8_t {
  Data,   // payload is a datum for the program
  Drain,  // payload is Int n: the device freed n units of output space
};

struct DriverMessage {
  DriverId driver{};
  Value payload;
  std::uint64_t time_ms = 0;
  MessageKind kind = MessageKind::Data;
};

/// Bounded multi-producer, single-consumer FIFO between interrupt-side
/// producers and the scheduler. Posting never blocks.
class BridgeQueue {
 public:
  explicit BridgeQueue(std::size_t capacity) : capacity_(capacity) {}

  /// false when full; the message is dropped and counted.
  bool post(const DriverMessage& msg);
  std::optional<DriverMessage> try_take();
  /// Blocks until a message is available.
  DriverMessage take();

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const;
  std::uint64_t dropped() const;

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable ready_;
  std::deque<DriverMessage> items_;
  std::uint64_t dropped_ = 0;
};

struct DriverHandle {
  DriverId id{};
  std::string name;
  std::unique_ptr<Peripheral> device;
  std::optional<Value> pending;  // async only, depth 1
  std::optional<ChannelId> bound;
  std::uint64_t slot_drops = 0;
};

// The five-operation driver interface.
Value ll_read(DriverHandle& drv);
std::uint32_t ll_write(DriverHandle& drv, Value data);
std::uint32_t ll_data_readable(const DriverHandle& drv);
std::uint32_t ll_data_writeable(const DriverHandle& drv);
bool ll_is_synchronous(const DriverHandle& drv);

class Bridge {
 public:
  Bridge(std::size_t driver_capacity, std::size_t queue_capacity);

  /// Ids are dense from 0 in registration order; DriverCapacity when full.
  DriverId register_driver(std::string name, std::unique_ptr<Peripheral> device);

  DriverHandle& driver(DriverId id);
  const DriverHandle& driver(DriverId id) const;
  std::optional<DriverId> find(std::string_view name) const;
  std::size_t size() const { return drivers_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t bound_count() const;

  BridgeQueue& queue() { return queue_; }
  const BridgeQueue& queue() const { return queue_; }

  /// Bind `chan` to driver `drv`; returns the driver's external thread id.
  ThreadId spawn_external(ChannelTable& channels, ChannelId chan, DriverId drv);

  /// Store an async payload in the pending slot. Drops the newest payload
  /// (returns false) when the slot is occupied.
  bool latch(DriverId id, Value payload);

  std::vector<DriverHandle>& drivers() { return drivers_; }
  const std::vector<DriverHandle>& drivers() const { return drivers_; }

 private:
  std::size_t capacity_;
  std::vector<DriverHandle> drivers_;
  BridgeQueue queue_;
};

}  // namespace svm
