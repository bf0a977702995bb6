#include "svm/config.hpp"

#include <stdexcept>
#include <string>

#include "svm/context.hpp"
#include "svm/heap.hpp"

namespace svm {

void RunConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(heap_bytes, "heap-bytes");
  positive(stack_bytes, "stack-bytes");
  positive(contexts, "contexts");
  positive(channels, "channels");
  positive(drivers, "drivers");
  positive(queue_cap, "queue-cap");
  positive(chan_queue_cap, "chan-queue");
  if (heap_bytes < kCellBytes)
    throw std::invalid_argument("heap-bytes must hold at least one " + std::to_string(kCellBytes) + "-byte cell");
  if (stack_bytes < kValueBytes)
    throw std::invalid_argument("stack-bytes must hold at least one " + std::to_string(kValueBytes) + "-byte value");
  if (contexts > 0x7fff'ffffu) throw std::invalid_argument("contexts out of range");
}

}  // namespace svm
