#pragma once

#include <cstdint>
#include <vector>

#include "svm/bridge.hpp"

namespace svm {

/// Synchronous GPIO output. Reading returns the last written level.
class Led final : public Peripheral {
 public:
  std::string_view kind() const override { return "led"; }
  bool synchronous() const override { return true; }
  Value sample() const override { return Value::integer(level_); }
  std::uint32_t free_space() const override { return 1; }
  void accept(Value v) override;

  int level() const { return level_; }
  const std::vector<int>& history() const { return history_; }

 private:
  int level_ = 0;
  std::vector<int> history_;
};

/// Interrupt-driven input; its data only arrives through driver messages.
class Button final : public Peripheral {
 public:
  std::string_view kind() const override { return "button"; }
  bool synchronous() const override { return false; }
  std::uint32_t free_space() const override { return 0; }
  void accept(Value v) override;

  /// Level the scenario last drove the pin to.
  int last_level() const { return last_level_; }
  void set_level(int level) { last_level_ = level; }

 private:
  int last_level_ = 0;
};

/// Serial port with a bounded transmit buffer that the scenario drains.
class Uart final : public Peripheral {
 public:
  explicit Uart(std::uint32_t tx_capacity = 8) : capacity_(tx_capacity) {}

  std::string_view kind() const override { return "uart"; }
  bool synchronous() const override { return false; }
  std::uint32_t free_space() const override { return capacity_ - buffered(); }
  void accept(Value v) override;
  void drain(std::uint32_t count) override;

  std::uint32_t capacity() const { return capacity_; }
  std::uint32_t buffered() const { return static_cast<std::uint32_t>(written_ - drained_); }
  std::uint64_t written() const { return written_; }
  std::uint64_t drained() const { return drained_; }
  /// Every byte that left the buffer, in order.
  const std::vector<std::uint8_t>& line() const { return line_; }

 private:
  std::uint32_t capacity_;
  std::vector<std::uint8_t> tx_;
  std::uint64_t written_ = 0;
  std::uint64_t drained_ = 0;
  std::vector<std::uint8_t> line_;
};

}  // namespace svm
