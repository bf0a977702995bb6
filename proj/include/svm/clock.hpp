#pragma once

#include <cstdint>

namespace svm {

/// Simulated milliseconds. Moves forward only at sleep boundaries or by a
/// fixed per-instruction cost.
class VirtualClock {
 public:
  std::uint64_t now() const { return now_ms_; }
  void advance_to(std::uint64_t t) {
    if (t > now_ms_) now_ms_ = t;
  }
  void tick(std::uint64_t ms) { now_ms_ += ms; }

 private:
  std::uint64_t now_ms_ = 0;
};

}  // namespace svm
