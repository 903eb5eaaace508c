#include "pir/cfg.hpp"

#include <algorithm>
#include <functional>

namespace pir {

Cfg::Cfg(const Code& c) : succs(c.blocks.size()), preds(c.blocks.size()) {
    for (size_t i = 0; i < c.blocks.size(); ++i) {
        for (BlockId t : successors(c.blocks[i])) {
            int j = c.index_of(t);
            if (j < 0) continue;
            if (std::find(succs[i].begin(), succs[i].end(), j) != succs[i].end()) continue;
            succs[i].push_back(j);
            preds[j].push_back(static_cast<int>(i));
        }
    }
}

DomInfo compute_dominators(const Code& c) {
    Cfg g(c);
    size_t n = c.blocks.size();
    DomInfo d;
    d.idom.assign(n, -1);
    d.frontier.assign(n, {});
    d.reachable.assign(n, false);
    d.children.assign(n, {});
    d.pre.assign(n, -1);
    d.post.assign(n, -1);
    if (n == 0) return d;

    // Postorder by iterative DFS.
    std::vector<int> post;
    std::vector<std::pair<int, size_t>> stack{{0, 0}};
    d.reachable[0] = true;
    while (!stack.empty()) {
        auto& [b, k] = stack.back();
        if (k < g.succs[b].size()) {
            int s = g.succs[b][k++];
            if (!d.reachable[s]) {
                d.reachable[s] = true;
                stack.push_back({s, 0});
            }
        } else {
            post.push_back(b);
            stack.pop_back();
        }
    }
    d.rpo.assign(post.rbegin(), post.rend());
    std::vector<int> order(n, -1);
    for (size_t i = 0; i < d.rpo.size(); ++i) order[d.rpo[i]] = static_cast<int>(i);

    // Cooper, Harvey, Kennedy: iterate idoms to a fixed point over RPO.
    std::vector<int> idom(n, -1);
    idom[0] = 0;
    auto intersect = [&](int a, int b) {
        while (a != b) {
            while (order[a] > order[b]) a = idom[a];
            while (order[b] > order[a]) b = idom[b];
        }
        return a;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 1; i < d.rpo.size(); ++i) {
            int b = d.rpo[i];
            int nd = -1;
            for (int p : g.preds[b]) {
                if (!d.reachable[p] || idom[p] < 0) continue;
                nd = nd < 0 ? p : intersect(p, nd);
            }
            if (nd != idom[b]) {
                idom[b] = nd;
                changed = true;
            }
        }
    }
    for (size_t b = 1; b < n; ++b)
        if (d.reachable[b]) {
            d.idom[b] = idom[b];
            d.children[idom[b]].push_back(static_cast<int>(b));
        }

    int clock = 0;
    std::function<void(int)> walk = [&](int b) {
        d.pre[b] = clock++;
        for (int ch : d.children[b]) walk(ch);
        d.post[b] = clock++;
    };
    walk(0);

    for (size_t b = 0; b < n; ++b) {
        if (!d.reachable[b]) continue;
        std::vector<int> rp;
        for (int p : g.preds[b])
            if (d.reachable[p]) rp.push_back(p);
        if (rp.empty() || (b != 0 && rp.size() < 2)) continue;  // the entry also has the virtual start edge
        for (int p : rp) {
            int runner = p;
            while (runner != d.idom[b] && runner >= 0) {
                d.frontier[runner].insert(static_cast<int>(b));
                if (runner == 0) break;
                runner = d.idom[runner];
            }
        }
    }
    return d;
}

bool dominates(const DomInfo& dom, Loc a, Loc b) {
    if (a.block == b.block) return a.index < b.index;
    return dom.dominates_block(a.block, b.block);
}

std::set<int> iterated_frontier(const DomInfo& dom, const std::set<int>& blocks) {
    std::set<int> result;
    std::vector<int> work(blocks.begin(), blocks.end());
    std::set<int> queued(blocks.begin(), blocks.end());
    while (!work.empty()) {
        int b = work.back();
        work.pop_back();
        for (int f : dom.frontier[b]) {
            if (result.insert(f).second && queued.insert(f).second) work.push_back(f);
        }
    }
    return result;
}

bool remove_unreachable(Code& c) {
    DomInfo d = compute_dominators(c);
    std::set<BlockId> dead;
    for (size_t i = 0; i < c.blocks.size(); ++i)
        if (!d.reachable[i]) dead.insert(c.blocks[i].id);
    if (dead.empty()) return false;
    std::vector<BasicBlock> kept;
    for (auto& b : c.blocks)
        if (!dead.count(b.id)) kept.push_back(std::move(b));
    c.blocks = std::move(kept);
    for (auto& b : c.blocks)
        for (auto& in : b.instrs) {
            if (in.op != Op::Phi) continue;
            for (size_t k = in.targets.size(); k-- > 0;)
                if (dead.count(in.targets[k])) {
                    in.targets.erase(in.targets.begin() + k);
                    in.args.erase(in.args.begin() + k);
                }
        }
    return true;
}

}  // namespace pir
