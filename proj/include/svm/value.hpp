#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>

namespace svm {

enum class ChannelId : std::uint32_t {};
enum class ThreadId : std::uint32_t {};
enum class DriverId : std::uint32_t {};

constexpr std::uint32_t index_of(ChannelId id) { return static_cast<std::uint32_t>(id); }
constexpr std::uint32_t index_of(ThreadId id) { return static_cast<std::uint32_t>(id); }
constexpr std::uint32_t index_of(DriverId id) { return static_cast<std::uint32_t>(id); }

// Thread ids with this bit set name an external process created by SPAWNX.
// They never occupy a context slot.
constexpr std::uint32_t kExternalThreadBit = 0x8000'0000u;

constexpr ThreadId external_thread(DriverId d) { return ThreadId{kExternalThreadBit | index_of(d)}; }
constexpr bool is_external(ThreadId t) { return (index_of(t) & kExternalThreadBit) != 0; }

struct CellRef {
  std::uint32_t index = 0;
  friend constexpr auto operator<=>(CellRef, CellRef) = default;
};

enum class Tag : std::uint8_t {
  Unit,
  Int,
  Bool,
  Label,     // absolute instruction index
  Channel,
  Thread,
  Identity,  // the identity wrap marker
  // heap references
  Pair,
  Closure,   // cell (Label code, env)
  Event,     // event-list node (base-event record, rest)
};

constexpr bool is_heap_tag(Tag t) { return t == Tag::Pair || t == Tag::Closure || t == Tag::Event; }

/// Tagged machine word. Heap references are told apart from immediates by
/// tag only.
class Value {
 public:
  constexpr Value() = default;

  static constexpr Value unit() { return Value(Tag::Unit, 0); }
  static constexpr Value integer(std::int32_t v) { return Value(Tag::Int, static_cast<std::uint32_t>(v)); }
  static constexpr Value boolean(bool b) { return Value(Tag::Bool, b ? 1u : 0u); }
  static constexpr Value label(std::uint32_t pc) { return Value(Tag::Label, pc); }
  static constexpr Value channel(ChannelId c) { return Value(Tag::Channel, index_of(c)); }
  static constexpr Value thread(ThreadId t) { return Value(Tag::Thread, index_of(t)); }
  static constexpr Value identity() { return Value(Tag::Identity, 0); }
  static constexpr Value pair(CellRef c) { return Value(Tag::Pair, c.index); }
  static constexpr Value closure(CellRef c) { return Value(Tag::Closure, c.index); }
  static constexpr Value event(CellRef c) { return Value(Tag::Event, c.index); }
  static constexpr Value from_raw(Tag tag, std::uint32_t bits) { return Value(tag, bits); }

  constexpr Tag tag() const { return tag_; }
  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool is(Tag t) const { return tag_ == t; }
  constexpr bool is_ref() const { return is_heap_tag(tag_); }

  constexpr std::int32_t as_int() const { return static_cast<std::int32_t>(bits_); }
  constexpr bool as_bool() const { return bits_ != 0; }
  constexpr std::uint32_t as_label() const { return bits_; }
  constexpr ChannelId as_channel() const { return ChannelId{bits_}; }
  constexpr ThreadId as_thread() const { return ThreadId{bits_}; }
  constexpr CellRef as_cell() const { return CellRef{bits_}; }

  friend constexpr bool operator==(Value, Value) = default;

 private:
  constexpr Value(Tag tag, std::uint32_t bits) : tag_(tag), bits_(bits) {}

  Tag tag_ = Tag::Unit;
  std::uint32_t bits_ = 0;
};

/// Bytes one Value occupies on a context stack, for budget accounting.
constexpr std::size_t kValueBytes = sizeof(Value);
static_assert(kValueBytes == 8);

std::string to_string(Value v);
std::string to_string(ThreadId t);

}  // namespace svm
