#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svm/program.hpp"

namespace svm {

// Assembly source, one statement per line:
//
//   ; comment (also #)
//   .const <name> <int|true|false|unit>   pool slots in declaration order
//   .entry <label>                         default: label `main`, else 0
//   <label>:  [instruction]
//   MNEMONIC [operand]
//
// Label operands are symbolic. LOADI takes a const name or a pool index.
// SPAWNX takes a driver number or one of led0, led1, but0, but1.

Program assemble_program(std::string_view source);
std::vector<std::uint8_t> assemble(std::string_view source);

/// Listing with synthesized labels (L<pc>) and const names (c<i>) that
/// reassembles to the same image.
std::string disassemble(const Program& program);
std::string disassemble(std::span<const std::uint8_t> image);

}  // namespace svm
