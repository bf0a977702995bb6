#include <doctest.h>

#include "svm/error.hpp"
#include "testkit.hpp"

using namespace svm;

namespace {

Error error_of(std::string_view src) {
  try {
    assemble_program(src);
  } catch (const Error& e) {
    return e;
  }
  FAIL("source assembled");
  return Error(ErrorCode::ParseError, "unreachable");
}

std::vector<std::string> corpus() {
  std::vector<std::string> out = {
      svmtest::fixture("button_blinky.sasm"),
      "main: STOP\n",
      ".const u unit\n.const t true\n.const n -7\nmain: LOADI u\nLOADI 2\nLOADI t\nSTOP\n",
      "start: GOTO end\nmid: CLEAR\nend: STOP\n.entry mid\n",
      "main: CHANNEL\nSPAWNX 15\nSTOP\n",
  };
  for (int k = 1; k <= 3; ++k) out.push_back(svmtest::rewrite_example_program(k));
  return out;
}

}  // namespace

TEST_CASE("a one-instruction program") {
  Program p = assemble_program("main: STOP\n");
  CHECK(p.code.size() == 1);
  CHECK(p.pool.empty());
  CHECK(p.entry == 0);
}

TEST_CASE("mnemonics are case-insensitive and comments ignored") {
  Program p = assemble_program("; header\n  # also a comment\nmain: push ; trailing\n  Swap\n  stop\n");
  REQUIRE(p.code.size() == 3);
  CHECK(p.code[0].op == Op::Push);
  CHECK(p.code[1].op == Op::Swap);
}

TEST_CASE("labels resolve forward and backward, stacked labels share a pc") {
  Program p = assemble_program("main: GOTO b\na: b: ACC 2\nGOTOFALSE a\nSTOP\n");
  CHECK(p.code[0] == Instruction{Op::Goto, 1});
  CHECK(p.code[1] == Instruction{Op::Acc, 2});
  CHECK(p.code[2] == Instruction{Op::GotoFalse, 1});
}

TEST_CASE("entry defaults to main and follows .entry") {
  CHECK(assemble_program("x: CLEAR\nmain: STOP\n").entry == 1);
  CHECK(assemble_program("x: CLEAR\ny: STOP\n").entry == 0);
  CHECK(assemble_program(".entry y\nx: CLEAR\ny: STOP\n").entry == 1);
}

TEST_CASE("SPAWNX accepts the board names and numbers") {
  Program p = assemble_program("main: SPAWNX led0\nSPAWNX led1\nSPAWNX but0\nSPAWNX but1\nSPAWNX 9\nSTOP\n");
  CHECK(p.code[0].operand == 0);
  CHECK(p.code[1].operand == 1);
  CHECK(p.code[2].operand == 2);
  CHECK(p.code[3].operand == 3);
  CHECK(p.code[4].operand == 9);
}

TEST_CASE("assembly errors carry their line") {
  struct Case {
    const char* src;
    ErrorCode code;
    std::size_t line;
  };
  const Case cases[] = {
      {"main: STOP\nGOTO nowhere\n", ErrorCode::UndefinedLabel, 2},
      {"a: STOP\na: STOP\n", ErrorCode::DuplicateLabel, 2},
      {".const k 1\n.const k 2\nmain: STOP\n", ErrorCode::DuplicateLabel, 2},
      {"main: ACC\n", ErrorCode::BadOperand, 1},
      {"main: STOP 3\n", ErrorCode::BadOperand, 1},
      {"main: ACC 70000\n", ErrorCode::BadOperand, 1},
      {"main: LOADI missing\n", ErrorCode::UndefinedLabel, 1},
      {"main: LOADI 0\n", ErrorCode::BadOperand, 1},  // empty pool
      {"main: SPAWNX led9\n", ErrorCode::BadOperand, 1},
      {"\n\nmain: FROB\n", ErrorCode::ParseError, 3},
      {".const k banana\n", ErrorCode::BadOperand, 1},
      {".entry nowhere\nmain: STOP\n", ErrorCode::UndefinedLabel, 1},
  };
  for (const auto& c : cases) {
    INFO(c.src);
    Error e = error_of(c.src);
    CHECK(e.code() == c.code);
    CHECK(e.line() == c.line);
  }
}

TEST_CASE("disassembly reassembles to the identical image") {
  for (const auto& src : corpus()) {
    auto image = assemble(src);
    std::string listing = disassemble(image);
    INFO(listing);
    CHECK(assemble(listing) == image);
    CHECK(disassemble(assemble(listing)) == listing);
  }
}

TEST_CASE("an empty pool lists no constants") {
  std::string listing = disassemble(assemble_program("main: STOP\n"));
  CHECK(listing.find(".const") == std::string::npos);
}

TEST_CASE("the button-blinky listing names drivers by number") {
  std::string listing = disassemble(assemble_program(svmtest::fixture("button_blinky.sasm")));
  CHECK(listing.find("SPAWNX 2") != std::string::npos);
  CHECK(listing.find("SPAWNX 0") != std::string::npos);
  CHECK(listing.find("WRAP") != std::string::npos);
}
