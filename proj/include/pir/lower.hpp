#pragma once

#include <set>
#include <vector>

#include "pir/frontend.hpp"
#include "pir/ir.hpp"

namespace pir {

/// Lowers a parsed program: one function per FunDef plus the synthetic
/// top-level function "main". Baselines come with their checkpoint tables.
Program lower_program(const mr::Expr& ast);

/// Parses and lowers in one step.
Program compile_source(const std::string& source);

/// Whether child `index` of `parent` is evaluated strictly.
bool strict_position(const mr::Expr& parent, size_t index);

/// Registers live immediately before each instruction, indexed by flat location.
std::vector<std::set<Reg>> live_before(const Code& c);

/// Entry checkpoint plus one checkpoint after every Call/Force/LdFun.
std::vector<Checkpoint> emit_checkpoints(const Code& baseline, Reg entry_env);

}  // namespace pir
