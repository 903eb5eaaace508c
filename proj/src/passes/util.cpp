#include "util.hpp"

#include <algorithm>

namespace pir::detail {

void retarget_phis(Code& c, int bi, BlockId from, BlockId to) {
    for (BlockId s : successors(c.blocks[bi])) {
        int si = c.index_of(s);
        if (si < 0) continue;
        for (auto& in : c.blocks[si].instrs) {
            if (in.op != Op::Phi) break;
            for (auto& t : in.targets)
                if (t == from) t = to;
        }
    }
}

int split_block(Version& v, int bi, int at) {
    Code& c = v.body;
    BasicBlock nb;
    nb.id = v.fresh_block();
    auto& src = c.blocks[bi].instrs;
    nb.instrs.assign(std::make_move_iterator(src.begin() + at), std::make_move_iterator(src.end()));
    src.erase(src.begin() + at, src.end());
    BlockId old = c.blocks[bi].id;
    c.blocks.insert(c.blocks.begin() + bi + 1, std::move(nb));
    retarget_phis(c, bi + 1, old, c.blocks[bi + 1].id);
    return bi + 1;
}

std::map<Reg, Loc> definitions(const Code& c) {
    std::map<Reg, Loc> out;
    for (size_t b = 0; b < c.blocks.size(); ++b)
        for (size_t i = 0; i < c.blocks[b].instrs.size(); ++i) {
            Reg d = c.blocks[b].instrs[i].dst;
            if (d != kNoReg) out[d] = Loc{static_cast<int>(b), static_cast<int>(i)};
        }
    return out;
}

void freshen(Version& v, Code& c, const std::map<Reg, Operand>& free_map) {
    std::map<Reg, Reg> rmap;
    std::map<BlockId, BlockId> bmap;
    for (auto& b : c.blocks) {
        bmap[b.id] = v.fresh_block();
        for (auto& in : b.instrs)
            if (in.dst != kNoReg) rmap[in.dst] = v.fresh_register();
    }
    for (auto& b : c.blocks) {
        b.id = bmap.at(b.id);
        for (auto& in : b.instrs) {
            if (in.dst != kNoReg) in.dst = rmap.at(in.dst);
            in.for_each_operand([&](Operand& a) {
                if (!a.is_reg()) return;
                auto it = rmap.find(a.reg);
                if (it != rmap.end()) {
                    a.reg = it->second;
                    return;
                }
                auto ft = free_map.find(a.reg);
                if (ft != free_map.end()) a = ft->second;
            });
            for (auto& t : in.targets) {
                auto it = bmap.find(t);
                if (it != bmap.end()) t = it->second;
            }
        }
    }
}

Operand splice(Version& v, int bi, int ii, Code inlinee) {
    Code& c = v.body;
    int ti = split_block(v, bi, ii + 1);
    c.blocks[bi].instrs.pop_back();
    BlockId tail = c.blocks[ti].id;
    std::vector<std::pair<BlockId, Operand>> rets;
    for (auto& b : inlinee.blocks) {
        Instr& t = b.instrs.back();
        if (t.op != Op::Return) continue;
        rets.push_back({b.id, t.args[0]});
        Instr br(Op::Branch);
        br.targets = {tail};
        t = br;
    }
    Instr enter(Op::Branch);
    enter.targets = {inlinee.blocks.front().id};
    c.blocks[bi].instrs.push_back(enter);
    c.blocks.insert(c.blocks.begin() + ti, std::make_move_iterator(inlinee.blocks.begin()),
                    std::make_move_iterator(inlinee.blocks.end()));
    if (rets.size() == 1) return rets[0].second;
    if (rets.empty()) return Operand::missing();
    Instr phi(Op::Phi);
    phi.dst = v.fresh_register();
    for (auto& [b, op] : rets) {
        phi.args.push_back(op);
        phi.targets.push_back(b);
    }
    Reg r = phi.dst;
    c.block(tail).instrs.insert(c.block(tail).instrs.begin(), phi);
    return Operand::of(r);
}

VarReader::VarReader(Version& v, bool allow_missing) : v_(v), allow_missing_(allow_missing), cfg_(v.body) {}

std::optional<Operand> VarReader::read(Reg env, const std::string& var, int bi, int ii) {
    size_t phis = phis_.size();
    size_t journal = journal_.size();
    auto r = scan(env, var, bi, ii);
    if (!r) {
        phis_.resize(phis);
        while (journal_.size() > journal) {
            at_start_.erase(journal_.back());
            journal_.pop_back();
        }
    }
    return r;
}

std::optional<Operand> VarReader::scan(Reg env, const std::string& var, int bi, int ii) {
    const auto& instrs = v_.body.blocks[bi].instrs;
    for (int k = ii - 1; k >= 0; --k) {
        const Instr& in = instrs[k];
        if (in.op == Op::StVar && in.env.is(env) && in.name == var) return in.args[0];
        if (in.op == Op::MkEnv && in.dst == env) {
            for (size_t j = 0; j < in.names.size(); ++j)
                if (in.names[j] == var) return in.args[j];
            if (allow_missing_) return Operand::missing();
            return std::nullopt;
        }
    }
    return at_block_start(env, var, bi);
}

std::optional<Operand> VarReader::at_block_start(Reg env, const std::string& var, int bi) {
    auto key = std::make_tuple(env, var, bi);
    auto it = at_start_.find(key);
    if (it != at_start_.end()) return it->second;
    const auto& preds = cfg_.preds[bi];
    if (preds.empty()) return std::nullopt;
    if (preds.size() == 1) {
        int p = preds[0];
        auto r = scan(env, var, p, static_cast<int>(v_.body.blocks[p].instrs.size()));
        if (r) {
            at_start_[key] = *r;
            journal_.push_back(key);
        }
        return r;
    }
    Reg reg = v_.fresh_register();
    size_t idx = phis_.size();
    phis_.push_back(PendingPhi{v_.body.blocks[bi].id, reg, {}});
    at_start_[key] = Operand::of(reg);
    journal_.push_back(key);
    for (int p : preds) {
        auto r = scan(env, var, p, static_cast<int>(v_.body.blocks[p].instrs.size()));
        if (!r) return std::nullopt;
        phis_[idx].inputs.push_back({v_.body.blocks[p].id, *r});
    }
    return Operand::of(reg);
}

void VarReader::materialize() {
    for (auto& p : phis_) {
        Instr phi(Op::Phi);
        phi.dst = p.reg;
        for (auto& [b, op] : p.inputs) {
            phi.targets.push_back(b);
            phi.args.push_back(op);
        }
        auto& instrs = v_.body.block(p.block).instrs;
        auto pos = instrs.begin();
        while (pos != instrs.end() && pos->op == Op::Phi) ++pos;
        instrs.insert(pos, phi);
    }
    phis_.clear();
    at_start_.clear();
    journal_.clear();
}

void erase_positions(Code& c, std::vector<Pos> ps) {
    std::sort(ps.begin(), ps.end(), [](const Pos& a, const Pos& b) {
        return a.block != b.block ? a.block < b.block : a.index > b.index;
    });
    ps.erase(std::unique(ps.begin(), ps.end(), [](const Pos& a, const Pos& b) {
                 return a.block == b.block && a.index == b.index;
             }),
             ps.end());
    for (auto& p : ps) {
        auto& instrs = c.block(p.block).instrs;
        instrs.erase(instrs.begin() + p.index);
    }
}

bool prune_promises(Version& v) {
    std::set<std::string> keep;
    std::vector<const Code*> work{&v.body};
    while (!work.empty()) {
        const Code* c = work.back();
        work.pop_back();
        for (auto& b : c->blocks)
            for (auto& in : b.instrs)
                if (in.op == Op::MkArg && keep.insert(in.name).second)
                    if (const Promise* p = v.promise(in.name)) work.push_back(&p->code);
    }
    size_t before = v.promises.size();
    std::erase_if(v.promises, [&](const Promise& p) { return !keep.count(p.id); });
    return v.promises.size() != before;
}

}  // namespace pir::detail
