#include "svm/error.hpp"

namespace svm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedImage: return "TruncatedImage";
    case ErrorCode::DanglingLabel: return "DanglingLabel";
    case ErrorCode::PoolIndexOutOfRange: return "PoolIndexOutOfRange";
    case ErrorCode::UnknownOpcode: return "UnknownOpcode";
    case ErrorCode::BadOperand: return "BadOperand";
    case ErrorCode::StackOverflow: return "StackOverflow";
    case ErrorCode::StackUnderflow: return "StackUnderflow";
    case ErrorCode::TypeConfusion: return "TypeConfusion";
    case ErrorCode::OutOfMemory: return "OutOfMemory";
    case ErrorCode::NoFreeContext: return "NoFreeContext";
    case ErrorCode::NoFreeChannel: return "NoFreeChannel";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::ChannelQueueFull: return "ChannelQueueFull";
    case ErrorCode::AlreadyBound: return "AlreadyBound";
    case ErrorCode::UnknownDriver: return "UnknownDriver";
    case ErrorCode::DriverCapacity: return "DriverCapacity";
    case ErrorCode::NotReadable: return "NotReadable";
    case ErrorCode::NotWriteable: return "NotWriteable";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownDriverKind: return "UnknownDriverKind";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::UndefinedLabel: return "UndefinedLabel";
  }
  return "Unknown";
}

bool is_resource_exhaustion(ErrorCode code) {
  switch (code) {
    case ErrorCode::StackOverflow:
    case ErrorCode::OutOfMemory:
    case ErrorCode::NoFreeContext:
    case ErrorCode::NoFreeChannel:
    case ErrorCode::ChannelQueueFull:
    case ErrorCode::DriverCapacity:
      return true;
    default:
      return false;
  }
}

}  // namespace svm
