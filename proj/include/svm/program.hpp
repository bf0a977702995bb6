#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "svm/value.hpp"

namespace svm {

// Opcode numbering is part of the image format; append, never renumber.
enum class Op : std::uint8_t {
  // CAM core
  Stop = 0x00,
  Fst = 0x01,
  Snd = 0x02,
  Acc = 0x03,        // env := snd(fst^n env)
  Rest = 0x04,       // env := fst^n env
  Push = 0x05,
  Swap = 0x06,
  LoadI = 0x07,      // env := pool[k]
  Clear = 0x08,      // env := ()
  Cur = 0x09,        // env := closure(label, env)
  Comb = 0x0a,       // env := label (environment-free combinator)
  App = 0x0b,        // env = (f, x): call f with x
  Return = 0x0c,
  Call = 0x0d,       // push return address, jump
  Goto = 0x0e,
  GotoFalse = 0x0f,  // test env, restore env from stack, branch if false
  Cons = 0x10,       // env := (pop, env)
  // primitives, all of the form env := pop <op> env
  Add = 0x11,
  Sub = 0x12,
  Mul = 0x13,
  Eq = 0x14,
  Lt = 0x15,
  // higher-order concurrency
  Channel = 0x20,    // env := fresh channel
  SendEvt = 0x21,    // env := send(pop, env)
  RecvEvt = 0x22,    // env := recv(env)
  Choose = 0x23,     // env := choose(pop, env)
  Wrap = 0x24,       // env := wrap(pop, env)
  Sync = 0x25,
  Spawn = 0x26,      // spawn (label, env) applied to (); env := thread id
  SpawnX = 0x27,     // bind channel env to driver; env := external thread id
};

enum class OperandKind : std::uint8_t { None, Count, Pool, Label, Driver };

struct OpInfo {
  Op op;
  std::string_view mnemonic;
  OperandKind operand;
};

/// Lookup by opcode; nullopt for bytes that are not opcodes.
std::optional<OpInfo> op_info(std::uint8_t byte);
std::optional<OpInfo> op_info(std::string_view mnemonic);
std::span<const OpInfo> all_ops();

struct Instruction {
  Op op = Op::Stop;
  std::uint16_t operand = 0;
  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// A loaded bytecode program. Pool literals are Unit, Int or Bool.
struct Program {
  std::vector<Value> pool;
  std::vector<Instruction> code;
  std::uint32_t entry = 0;

  /// Throws the load errors for any structural violation.
  void validate() const;
};

inline constexpr std::uint8_t kImageVersion = 1;
inline constexpr char kImageMagic[4] = {'S', 'V', 'M', 'B'};

/// Decode and validate a binary image.
Program load_program(std::span<const std::uint8_t> image);

/// Encode a program to the binary image format. Deterministic.
std::vector<std::uint8_t> encode_program(const Program& program);

}  // namespace svm
