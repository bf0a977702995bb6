#include "svm/assembler.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>

#include "svm/error.hpp"

namespace svm {

namespace {

constexpr std::pair<std::string_view, std::uint16_t> kDriverNames[] = {
    {"led0", 0}, {"led1", 1}, {"but0", 2}, {"but1", 3}};

struct Pending {
  std::size_t pc;
  std::string label;
  std::size_t line;
};

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<std::int64_t> to_int(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
  return true;
}

std::uint16_t small_operand(std::string_view tok, std::size_t line) {
  auto v = to_int(tok);
  if (!v || *v < 0 || *v > 0xffff)
    throw Error(ErrorCode::BadOperand, line, "operand '" + std::string(tok) + "' is not in 0..65535");
  return static_cast<std::uint16_t>(*v);
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

Program assemble_program(std::string_view source) {
  Program p;
  std::map<std::string, std::size_t, std::less<>> labels;
  std::map<std::string, std::uint16_t, std::less<>> consts;
  std::vector<Pending> fixups;
  std::optional<std::pair<std::string, std::size_t>> entry;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    std::string_view line = source.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (auto c = line.find_first_of(";#"); c != std::string_view::npos) line = line.substr(0, c);
    auto tok = tokens(line);
    if (tok.empty()) continue;

    if (tok[0] == ".const") {
      if (tok.size() != 3 || !is_identifier(tok[1])) throw Error(ErrorCode::ParseError, lineno, "expected: .const <name> <value>");
      if (consts.count(tok[1])) throw Error(ErrorCode::DuplicateLabel, lineno, "constant '" + std::string(tok[1]) + "'");
      Value v;
      if (tok[2] == "true") v = Value::boolean(true);
      else if (tok[2] == "false") v = Value::boolean(false);
      else if (tok[2] == "unit" || tok[2] == "()") v = Value::unit();
      else if (auto n = to_int(tok[2]); n && *n >= INT32_MIN && *n <= INT32_MAX) v = Value::integer(static_cast<std::int32_t>(*n));
      else throw Error(ErrorCode::BadOperand, lineno, "constant value '" + std::string(tok[2]) + "'");
      if (p.pool.size() > 0xffff) throw Error(ErrorCode::BadOperand, lineno, "constant pool full");
      consts.emplace(std::string(tok[1]), static_cast<std::uint16_t>(p.pool.size()));
      p.pool.push_back(v);
      continue;
    }
    if (tok[0] == ".entry") {
      if (tok.size() != 2) throw Error(ErrorCode::ParseError, lineno, "expected: .entry <label>");
      entry.emplace(std::string(tok[1]), lineno);
      continue;
    }

    std::size_t i = 0;
    for (; i < tok.size() && tok[i].back() == ':'; ++i) {
      std::string_view name = tok[i].substr(0, tok[i].size() - 1);
      if (!is_identifier(name)) throw Error(ErrorCode::ParseError, lineno, "bad label '" + std::string(name) + "'");
      if (!labels.emplace(std::string(name), p.code.size()).second)
        throw Error(ErrorCode::DuplicateLabel, lineno, "label '" + std::string(name) + "'");
    }
    if (i == tok.size()) continue;

    std::string mnemonic = upper(tok[i]);
    auto info = op_info(mnemonic);
    if (!info) throw Error(ErrorCode::ParseError, lineno, "unknown instruction '" + std::string(tok[i]) + "'");
    std::size_t argc = tok.size() - i - 1;
    bool wants = info->operand != OperandKind::None;
    if (argc != (wants ? 1u : 0u))
      throw Error(ErrorCode::BadOperand, lineno, mnemonic + (wants ? " needs one operand" : " takes no operand"));

    Instruction ins{info->op, 0};
    if (wants) {
      std::string_view arg = tok[i + 1];
      switch (info->operand) {
        case OperandKind::Count: ins.operand = small_operand(arg, lineno); break;
        case OperandKind::Pool:
          if (auto it = consts.find(arg); it != consts.end()) ins.operand = it->second;
          else if (to_int(arg)) ins.operand = small_operand(arg, lineno);
          else throw Error(ErrorCode::UndefinedLabel, lineno, "constant '" + std::string(arg) + "'");
          if (ins.operand >= p.pool.size())
            throw Error(ErrorCode::BadOperand, lineno, "pool index " + std::to_string(ins.operand) + " not declared");
          break;
        case OperandKind::Label:
          if (!is_identifier(arg)) throw Error(ErrorCode::BadOperand, lineno, "label operand '" + std::string(arg) + "'");
          fixups.push_back({p.code.size(), std::string(arg), lineno});
          break;
        case OperandKind::Driver: {
          bool named = false;
          for (const auto& [name, id] : kDriverNames)
            if (arg == name) ins.operand = id, named = true;
          if (!named) ins.operand = small_operand(arg, lineno);
          break;
        }
        case OperandKind::None: break;
      }
    }
    if (p.code.size() >= 0xffff) throw Error(ErrorCode::BadOperand, lineno, "program too long");
    p.code.push_back(ins);
  }

  for (const auto& f : fixups) {
    auto it = labels.find(f.label);
    if (it == labels.end()) throw Error(ErrorCode::UndefinedLabel, f.line, "label '" + f.label + "'");
    p.code[f.pc].operand = static_cast<std::uint16_t>(it->second);
  }
  if (entry) {
    auto it = labels.find(entry->first);
    if (it == labels.end()) throw Error(ErrorCode::UndefinedLabel, entry->second, "entry label '" + entry->first + "'");
    p.entry = static_cast<std::uint32_t>(it->second);
  } else if (auto it = labels.find("main"); it != labels.end()) {
    p.entry = static_cast<std::uint32_t>(it->second);
  }
  if (p.code.empty()) throw Error(ErrorCode::ParseError, lineno, "no instructions");
  p.validate();
  return p;
}

std::vector<std::uint8_t> assemble(std::string_view source) { return encode_program(assemble_program(source)); }

std::string disassemble(const Program& program) {
  std::set<std::uint32_t> targets{program.entry};
  for (const auto& ins : program.code)
    if (op_info(static_cast<std::uint8_t>(ins.op))->operand == OperandKind::Label) targets.insert(ins.operand);

  std::string out;
  for (std::size_t i = 0; i < program.pool.size(); ++i) {
    Value v = program.pool[i];
    std::string lit = v.is(Tag::Int) ? std::to_string(v.as_int()) : v.is(Tag::Bool) ? (v.as_bool() ? "true" : "false") : "unit";
    out += ".const c" + std::to_string(i) + " " + lit + "\n";
  }
  out += ".entry L" + std::to_string(program.entry) + "\n";
  for (std::size_t pc = 0; pc < program.code.size(); ++pc) {
    if (targets.count(static_cast<std::uint32_t>(pc))) out += "L" + std::to_string(pc) + ":\n";
    const Instruction& ins = program.code[pc];
    auto info = op_info(static_cast<std::uint8_t>(ins.op));
    out += "    ";
    out += info->mnemonic;
    switch (info->operand) {
      case OperandKind::None: break;
      case OperandKind::Count:
      case OperandKind::Driver: out += " " + std::to_string(ins.operand); break;
      case OperandKind::Pool: out += " c" + std::to_string(ins.operand); break;
      case OperandKind::Label: out += " L" + std::to_string(ins.operand); break;
    }
    out += "\n";
  }
  return out;
}

std::string disassemble(std::span<const std::uint8_t> image) { return disassemble(load_program(image)); }

}  // namespace svm
