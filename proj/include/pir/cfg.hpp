#pragma once

#include <set>
#include <vector>

#include "pir/ir.hpp"

namespace pir {

/// Block-index based successor/predecessor lists.
struct Cfg {
    std::vector<std::vector<int>> succs;
    std::vector<std::vector<int>> preds;
    explicit Cfg(const Code& c);
};

struct DomInfo {
    std::vector<int> idom;                 // by block index; -1 for the entry and unreachable blocks
    std::vector<std::set<int>> frontier;   // by block index
    std::vector<int> rpo;                  // reachable block indices in reverse postorder
    std::vector<bool> reachable;
    std::vector<std::vector<int>> children;  // dominator tree
    std::vector<int> pre, post;            // dominator-tree DFS interval

    /// Non-strict block dominance.
    bool dominates_block(int a, int b) const {
        if (!reachable[a] || !reachable[b]) return false;
        return pre[a] <= pre[b] && post[b] <= post[a];
    }
};

struct Loc {
    int block;  // block index
    int index;  // instruction index
};

DomInfo compute_dominators(const Code& c);

/// True iff a strictly dominates b: a's block strictly dominates b's block,
/// or both are in the same block and a precedes b.
bool dominates(const DomInfo& dom, Loc a, Loc b);

/// Iterated dominance frontier of a set of block indices.
std::set<int> iterated_frontier(const DomInfo& dom, const std::set<int>& blocks);

/// Deletes blocks not reachable from the entry and drops their Phi inputs.
/// Returns true if anything was removed.
bool remove_unreachable(Code& c);

}  // namespace pir
