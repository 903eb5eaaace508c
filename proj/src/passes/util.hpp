#pragma once

#include <functional>
#include <map>
#include <optional>
#include <tuple>

#include "pir/analysis.hpp"
#include "pir/cfg.hpp"
#include "pir/ir.hpp"

namespace pir::detail {

/// Moves instructions [at, end) of block `bi` into a fresh block that takes
/// over the successors; the head block is left without a terminator.
/// Returns the new block's index (it is placed right after `bi`).
int split_block(Version& v, int bi, int at);

/// Rewrites Phi labels `from` -> `to` in the successors of block `bi`.
void retarget_phis(Code& c, int bi, BlockId from, BlockId to);

/// Registers defined by Phi/non-Phi instructions, by register.
std::map<Reg, Loc> definitions(const Code& c);

/// Replaces instruction (bi, ii) with `inlinee` (whose Returns yield the
/// value). Registers of the inlinee must already be fresh. Returns the
/// operand carrying the result.
Operand splice(Version& v, int bi, int ii, Code inlinee);

/// Renames every register defined in `c` to a fresh one of `v`; operands not
/// defined in `c` go through `free_map` (missing entries are kept).
/// Block ids are renamed to fresh ones as well.
void freshen(Version& v, Code& c, const std::map<Reg, Operand>& free_map);

/// On-demand SSA construction for variables of tracked environments.
/// Queries run on unmodified code; Phis are only created by `materialize`.
class VarReader {
  public:
    VarReader(Version& v, bool allow_missing);

    /// Value of `var` in env `env` just before instruction (bi, ii), or
    /// nullopt if some path reaches no definition.
    std::optional<Operand> read(Reg env, const std::string& var, int bi, int ii);

    /// Inserts the Phis created so far (same code the reader saw, modulo
    /// in-place operand rewrites and edits inside single blocks that keep
    /// block ids).
    void materialize();

  private:
    struct PendingPhi {
        BlockId block;
        Reg reg;
        std::vector<std::pair<BlockId, Operand>> inputs;
    };
    Version& v_;
    bool allow_missing_;
    Cfg cfg_;
    std::map<std::tuple<Reg, std::string, int>, Operand> at_start_;
    std::vector<PendingPhi> phis_;

    std::optional<Operand> scan(Reg env, const std::string& var, int bi, int ii);
    std::optional<Operand> at_block_start(Reg env, const std::string& var, int bi);
    std::vector<std::tuple<Reg, std::string, int>> journal_;
};

/// Flat-location-free position of an instruction that survives edits to
/// other blocks.
struct Pos {
    BlockId block;
    int index;
};

/// Deletes the given positions (any order).
void erase_positions(Code& c, std::vector<Pos> ps);

/// Drops promises no longer referenced by any MkArg.
bool prune_promises(Version& v);

}  // namespace pir::detail
