#include "svm/bridge.hpp"

#include <algorithm>

#include "svm/error.hpp"

namespace svm {

bool BridgeQueue::post(const DriverMessage& msg) {
  {
    std::lock_guard lock(mu_);
    if (items_.size() >= capacity_) {
      ++dropped_;
      return false;
    }
    items_.push_back(msg);
  }
  ready_.notify_one();
  return true;
}

std::optional<DriverMessage> BridgeQueue::try_take() {
  std::lock_guard lock(mu_);
  if (items_.empty()) return std::nullopt;
  DriverMessage m = items_.front();
  items_.pop_front();
  return m;
}

DriverMessage BridgeQueue::take() {
  std::unique_lock lock(mu_);
  ready_.wait(lock, [this] { return !items_.empty(); });
  DriverMessage m = items_.front();
  items_.pop_front();
  return m;
}

std::size_t BridgeQueue::size() const {
  std::lock_guard lock(mu_);
  return items_.size();
}

std::uint64_t BridgeQueue::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

Value ll_read(DriverHandle& drv) {
  if (drv.device->synchronous()) return drv.device->sample();
  if (!drv.pending) throw Error(ErrorCode::NotReadable, "driver " + drv.name + " has no pending data");
  Value v = *drv.pending;
  drv.pending.reset();
  return v;
}

std::uint32_t ll_write(DriverHandle& drv, Value data) {
  if (drv.device->free_space() == 0) throw Error(ErrorCode::NotWriteable, "driver " + drv.name + " cannot accept data");
  drv.device->accept(data);
  return 1;
}

std::uint32_t ll_data_readable(const DriverHandle& drv) {
  if (drv.device->synchronous()) return 1;
  return drv.pending ? 1 : 0;
}

std::uint32_t ll_data_writeable(const DriverHandle& drv) { return drv.device->free_space(); }

bool ll_is_synchronous(const DriverHandle& drv) { return drv.device->synchronous(); }

Bridge::Bridge(std::size_t driver_capacity, std::size_t queue_capacity)
    : capacity_(driver_capacity), queue_(queue_capacity) {
  drivers_.reserve(driver_capacity);
}

DriverId Bridge::register_driver(std::string name, std::unique_ptr<Peripheral> device) {
  if (drivers_.size() >= capacity_)
    throw Error(ErrorCode::DriverCapacity, "metadata exists for only " + std::to_string(capacity_) + " drivers");
  DriverHandle h;
  h.id = DriverId{static_cast<std::uint32_t>(drivers_.size())};
  h.name = std::move(name);
  h.device = std::move(device);
  drivers_.push_back(std::move(h));
  return drivers_.back().id;
}

DriverHandle& Bridge::driver(DriverId id) {
  if (index_of(id) >= drivers_.size()) throw Error(ErrorCode::UnknownDriver, "driver " + std::to_string(index_of(id)));
  return drivers_[index_of(id)];
}

const DriverHandle& Bridge::driver(DriverId id) const {
  if (index_of(id) >= drivers_.size()) throw Error(ErrorCode::UnknownDriver, "driver " + std::to_string(index_of(id)));
  return drivers_[index_of(id)];
}

std::optional<DriverId> Bridge::find(std::string_view name) const {
  for (const auto& d : drivers_)
    if (d.name == name) return d.id;
  return std::nullopt;
}

std::size_t Bridge::bound_count() const {
  return static_cast<std::size_t>(
      std::count_if(drivers_.begin(), drivers_.end(), [](const DriverHandle& d) { return d.bound.has_value(); }));
}

ThreadId Bridge::spawn_external(ChannelTable& channels, ChannelId chan, DriverId drv) {
  Channel& ch = channels.at(chan);
  DriverHandle& d = driver(drv);
  if (ch.driver) throw Error(ErrorCode::AlreadyBound, "channel " + std::to_string(index_of(chan)) + " already bound");
  if (d.bound) throw Error(ErrorCode::AlreadyBound, "driver " + d.name + " already bound");
  ch.driver = drv;
  d.bound = chan;
  return external_thread(drv);
}

bool Bridge::latch(DriverId id, Value payload) {
  DriverHandle& d = driver(id);
  if (d.pending) {
    ++d.slot_drops;
    return false;
  }
  d.pending = payload;
  return true;
}

}  // namespace svm
