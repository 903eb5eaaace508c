#pragma once

#include <stdexcept>
#include <string>

#include "pir/ir.hpp"

namespace pir {

class IrParseError : public std::runtime_error {
  public:
    IrParseError(const std::string& msg, int line);
    int line;
};

std::string print_instr(const Instr& in, const std::set<Reg>& env_regs);
std::string print_code(const Code& c, const std::set<Reg>& env_regs, const std::string& indent = "  ");
std::string print_ir(const Version& v);
Version parse_ir(const std::string& text);

/// Registers printed with the environment flavor (`eN`).
std::set<Reg> env_registers(const Version& v);

/// Human-oriented dump of every function and version.
std::string print_program(const Program& p);

}  // namespace pir
