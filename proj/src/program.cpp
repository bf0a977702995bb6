#include "svm/program.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "svm/error.hpp"

namespace svm {

namespace {

constexpr std::array kOps = {
    OpInfo{Op::Stop, "STOP", OperandKind::None},
    OpInfo{Op::Fst, "FST", OperandKind::None},
    OpInfo{Op::Snd, "SND", OperandKind::None},
    OpInfo{Op::Acc, "ACC", OperandKind::Count},
    OpInfo{Op::Rest, "REST", OperandKind::Count},
    OpInfo{Op::Push, "PUSH", OperandKind::None},
    OpInfo{Op::Swap, "SWAP", OperandKind::None},
    OpInfo{Op::LoadI, "LOADI", OperandKind::Pool},
    OpInfo{Op::Clear, "CLEAR", OperandKind::None},
    OpInfo{Op::Cur, "CUR", OperandKind::Label},
    OpInfo{Op::Comb, "COMB", OperandKind::Label},
    OpInfo{Op::App, "APP", OperandKind::None},
    OpInfo{Op::Return, "RETURN", OperandKind::None},
    OpInfo{Op::Call, "CALL", OperandKind::Label},
    OpInfo{Op::Goto, "GOTO", OperandKind::Label},
    OpInfo{Op::GotoFalse, "GOTOFALSE", OperandKind::Label},
    OpInfo{Op::Cons, "CONS", OperandKind::None},
    OpInfo{Op::Add, "ADD", OperandKind::None},
    OpInfo{Op::Sub, "SUB", OperandKind::None},
    OpInfo{Op::Mul, "MUL", OperandKind::None},
    OpInfo{Op::Eq, "EQ", OperandKind::None},
    OpInfo{Op::Lt, "LT", OperandKind::None},
    OpInfo{Op::Channel, "CHANNEL", OperandKind::None},
    OpInfo{Op::SendEvt, "SENDEVT", OperandKind::None},
    OpInfo{Op::RecvEvt, "RECVEVT", OperandKind::None},
    OpInfo{Op::Choose, "CHOOSE", OperandKind::None},
    OpInfo{Op::Wrap, "WRAP", OperandKind::None},
    OpInfo{Op::Sync, "SYNC", OperandKind::None},
    OpInfo{Op::Spawn, "SPAWN", OperandKind::Label},
    OpInfo{Op::SpawnX, "SPAWNX", OperandKind::Driver},
};

enum PoolTag : std::uint8_t { kPoolUnit = 0, kPoolInt = 1, kPoolBool = 2 };

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw Error(ErrorCode::TruncatedImage, "image ends at byte " + std::to_string(bytes_.size()));
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::span<const OpInfo> all_ops() { return kOps; }

std::optional<OpInfo> op_info(std::uint8_t byte) {
  auto it = std::find_if(kOps.begin(), kOps.end(),
                         [byte](const OpInfo& i) { return static_cast<std::uint8_t>(i.op) == byte; });
  if (it == kOps.end()) return std::nullopt;
  return *it;
}

std::optional<OpInfo> op_info(std::string_view mnemonic) {
  auto it = std::find_if(kOps.begin(), kOps.end(),
                         [mnemonic](const OpInfo& i) { return i.mnemonic == mnemonic; });
  if (it == kOps.end()) return std::nullopt;
  return *it;
}

void Program::validate() const {
  if (code.empty()) throw Error(ErrorCode::TruncatedImage, "program has no instructions");
  for (Value v : pool) {
    if (!v.is(Tag::Unit) && !v.is(Tag::Int) && !v.is(Tag::Bool))
      throw Error(ErrorCode::BadOperand, "pool literal is not unit, int or bool");
  }
  const auto size = code.size();
  for (std::size_t pc = 0; pc < size; ++pc) {
    const Instruction& ins = code[pc];
    auto info = op_info(static_cast<std::uint8_t>(ins.op));
    if (!info) throw Error(ErrorCode::UnknownOpcode, "at instruction " + std::to_string(pc));
    switch (info->operand) {
      case OperandKind::Label:
        if (ins.operand >= size)
          throw Error(ErrorCode::DanglingLabel, std::string(info->mnemonic) + " at " + std::to_string(pc) +
                                                    " targets " + std::to_string(ins.operand));
        break;
      case OperandKind::Pool:
        if (ins.operand >= pool.size())
          throw Error(ErrorCode::PoolIndexOutOfRange,
                      "LOADI at " + std::to_string(pc) + " reads pool[" + std::to_string(ins.operand) + "]");
        break;
      case OperandKind::None:
        if (ins.operand != 0) throw Error(ErrorCode::BadOperand, "operand on nullary instruction");
        break;
      case OperandKind::Count:
      case OperandKind::Driver:
        break;
    }
  }
  if (entry >= size) throw Error(ErrorCode::DanglingLabel, "entry point " + std::to_string(entry));
  // Control may never run off the end of the code.
  Op last = code.back().op;
  if (last != Op::Stop && last != Op::Goto && last != Op::Return)
    throw Error(ErrorCode::DanglingLabel, "last instruction falls through past the end of the code");
}

Program load_program(std::span<const std::uint8_t> image) {
  Reader in(image);
  std::array<std::uint8_t, 4> magic{};
  for (auto& b : magic) b = in.u8();
  if (!std::equal(magic.begin(), magic.end(), std::begin(kImageMagic)))
    throw Error(ErrorCode::BadMagic, "expected \"SVMB\"");
  std::uint8_t version = in.u8();
  if (version != kImageVersion)
    throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(version));

  Program p;
  std::uint16_t pool_count = in.u16();
  p.pool.reserve(pool_count);
  for (std::uint16_t i = 0; i < pool_count; ++i) {
    switch (in.u8()) {
      case kPoolUnit: p.pool.push_back(Value::unit()); break;
      case kPoolInt: p.pool.push_back(Value::integer(static_cast<std::int32_t>(in.u32()))); break;
      case kPoolBool: p.pool.push_back(Value::boolean(in.u8() != 0)); break;
      default: throw Error(ErrorCode::BadOperand, "unknown pool tag in entry " + std::to_string(i));
    }
  }

  std::uint32_t code_count = in.u32();
  if (code_count > 0xffff) throw Error(ErrorCode::BadOperand, "more instructions than u16 labels can address");
  p.code.reserve(code_count);
  for (std::uint32_t i = 0; i < code_count; ++i) {
    std::uint8_t byte = in.u8();
    auto info = op_info(byte);
    if (!info) throw Error(ErrorCode::UnknownOpcode, "byte " + std::to_string(byte) + " at instruction " + std::to_string(i));
    Instruction ins{info->op, 0};
    if (info->operand != OperandKind::None) ins.operand = in.u16();
    p.code.push_back(ins);
  }
  p.entry = in.u32();
  if (!in.at_end()) throw Error(ErrorCode::TruncatedImage, "trailing bytes after entry point");
  p.validate();
  return p;
}

std::vector<std::uint8_t> encode_program(const Program& program) {
  std::vector<std::uint8_t> out(std::begin(kImageMagic), std::end(kImageMagic));
  out.push_back(kImageVersion);
  put_u16(out, static_cast<std::uint16_t>(program.pool.size()));
  for (Value v : program.pool) {
    switch (v.tag()) {
      case Tag::Int:
        out.push_back(kPoolInt);
        put_u32(out, v.bits());
        break;
      case Tag::Bool:
        out.push_back(kPoolBool);
        out.push_back(v.as_bool() ? 1 : 0);
        break;
      default:
        out.push_back(kPoolUnit);
        break;
    }
  }
  put_u32(out, static_cast<std::uint32_t>(program.code.size()));
  for (const Instruction& ins : program.code) {
    out.push_back(static_cast<std::uint8_t>(ins.op));
    auto info = op_info(static_cast<std::uint8_t>(ins.op));
    if (info && info->operand != OperandKind::None) put_u16(out, ins.operand);
  }
  put_u32(out, program.entry);
  return out;
}

}  // namespace svm
