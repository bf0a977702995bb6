#include "svm/peripherals.hpp"

#include <algorithm>

#include "svm/error.hpp"

namespace svm {

void Led::accept(Value v) {
  if (!v.is(Tag::Int) && !v.is(Tag::Bool)) throw Error(ErrorCode::TypeConfusion, "LED level " + to_string(v));
  level_ = v.as_int() != 0 ? 1 : 0;
  history_.push_back(level_);
}

void Button::accept(Value) { throw Error(ErrorCode::NotWriteable, "a button has no output"); }

void Uart::accept(Value v) {
  if (!v.is(Tag::Int)) throw Error(ErrorCode::TypeConfusion, "UART byte " + to_string(v));
  if (free_space() == 0) throw Error(ErrorCode::NotWriteable, "UART transmit buffer full");
  tx_.push_back(static_cast<std::uint8_t>(v.as_int() & 0xff));
  ++written_;
}

void Uart::drain(std::uint32_t count) {
  auto n = std::min<std::size_t>(count, tx_.size());
  line_.insert(line_.end(), tx_.begin(), tx_.begin() + static_cast<std::ptrdiff_t>(n));
  tx_.erase(tx_.begin(), tx_.begin() + static_cast<std::ptrdiff_t>(n));
  drained_ += n;
}

}  // namespace svm
