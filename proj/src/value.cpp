#include "svm/value.hpp"

namespace svm {

std::string to_string(ThreadId t) {
  if (is_external(t)) return "x" + std::to_string(index_of(t) & ~kExternalThreadBit);
  return std::to_string(index_of(t));
}

std::string to_string(Value v) {
  switch (v.tag()) {
    case Tag::Unit: return "()";
    case Tag::Int: return std::to_string(v.as_int());
    case Tag::Bool: return v.as_bool() ? "true" : "false";
    case Tag::Label: return "@" + std::to_string(v.as_label());
    case Tag::Channel: return "ch" + std::to_string(v.bits());
    case Tag::Thread: return "t" + to_string(v.as_thread());
    case Tag::Identity: return "id";
    case Tag::Pair: return "pair#" + std::to_string(v.bits());
    case Tag::Closure: return "clo#" + std::to_string(v.bits());
    case Tag::Event: return "evt#" + std::to_string(v.bits());
  }
  return "?";
}

}  // namespace svm
