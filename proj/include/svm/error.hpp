#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace svm {

enum class ErrorCode {
  // image loading
  BadMagic,
  UnsupportedVersion,
  TruncatedImage,
  DanglingLabel,
  PoolIndexOutOfRange,
  UnknownOpcode,
  BadOperand,
  // interpreter
  StackOverflow,
  StackUnderflow,
  TypeConfusion,
  OutOfMemory,
  NoFreeContext,
  // channels and sync
  NoFreeChannel,
  UnknownChannel,
  ChannelQueueFull,
  // bridge
  AlreadyBound,
  UnknownDriver,
  DriverCapacity,
  NotReadable,
  NotWriteable,
  // text formats
  ParseError,
  UnknownDriverKind,
  NonMonotoneTime,
  DuplicateLabel,
  UndefinedLabel,
};

std::string_view to_string(ErrorCode code);

/// True for the codes that mean a statically sized resource ran out.
bool is_resource_exhaustion(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  // Text-format errors carry the 1-based source line.
  Error(ErrorCode code, std::size_t line, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + " at line " + std::to_string(line) + ": " +
                           what),
        code_(code),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_ = 0;
};

}  // namespace svm
