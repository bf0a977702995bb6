#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace svm {

/// Static memory configuration of one VM instance.
struct RunConfig {
  std::size_t heap_bytes = 1024;
  std::size_t stack_bytes = 1024;  // per context
  std::size_t contexts = 4;
  std::size_t channels = 100;
  std::size_t drivers = 16;
  std::size_t queue_cap = 16;       // bridge message queue
  std::size_t chan_queue_cap = 16;  // per channel and direction
  std::uint64_t step_cost_ms = 0;   // virtual time charged per instruction
  std::optional<std::uint64_t> max_steps;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

}  // namespace svm
