#include "svm/channel.hpp"

#include "svm/error.hpp"

namespace svm {

const char* to_string(EventKind k) { return k == EventKind::Send ? "send" : "recv"; }

ChannelTable::ChannelTable(std::size_t capacity, std::size_t queue_capacity)
    : capacity_(capacity), queue_capacity_(queue_capacity) {
  channels_.reserve(capacity);
}

ChannelId ChannelTable::create() {
  if (channels_.size() >= capacity_)
    throw Error(ErrorCode::NoFreeChannel, "all " + std::to_string(capacity_) + " channels allocated");
  Channel ch;
  ch.id = ChannelId{static_cast<std::uint32_t>(channels_.size())};
  channels_.push_back(std::move(ch));
  return channels_.back().id;
}

Channel& ChannelTable::at(ChannelId id) {
  if (!contains(id)) throw Error(ErrorCode::UnknownChannel, "channel " + std::to_string(index_of(id)));
  return channels_[index_of(id)];
}

const Channel& ChannelTable::at(ChannelId id) const {
  if (!contains(id)) throw Error(ErrorCode::UnknownChannel, "channel " + std::to_string(index_of(id)));
  return channels_[index_of(id)];
}

}  // namespace svm
