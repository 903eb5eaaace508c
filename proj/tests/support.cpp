#include "support.hpp"

#include <fstream>
#include <sstream>

#include "pir/cfg.hpp"
#include "pir/lower.hpp"
#include "pir/verify.hpp"

#ifndef CORPUS_DIR
#define CORPUS_DIR "corpus"
#endif

namespace testing_support {

using namespace pir;

std::string corpus_path(const std::string& name) { return std::string(CORPUS_DIR) + "/" + name; }

std::string read_corpus(const std::string& name) {
    std::ifstream in(corpus_path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Program optimized(const std::string& source, const PipelineOptions& opts) {
    Program p = compile_source(source);
    run_pipeline(p, opts);
    return p;
}

RunResult run_opt(const Program& p, const RunOptions& base) {
    RunOptions o = base;
    o.selector = VersionSelector::Optimized;
    return run(p, o);
}

std::multiset<std::string> opcodes(const Version& v) {
    std::multiset<std::string> out;
    for (auto& b : v.body.blocks)
        for (auto& in : b.instrs) out.insert(op_name(in.op));
    return out;
}

Code random_cfg(std::mt19937_64& rng, int n) {
    Code c;
    auto pick = [&](int k) { return static_cast<int>(rng() % static_cast<uint64_t>(k)); };
    for (int i = 0; i < n; ++i) {
        BasicBlock b;
        b.id = i;
        int kind = pick(5);
        if (kind == 0 || n == 1) {
            Instr r(Op::Return);
            r.args = {Operand::global()};
            b.instrs.push_back(r);
        } else if (kind <= 2) {
            Instr br(Op::Branch);
            br.targets = {pick(n)};
            b.instrs.push_back(br);
        } else {
            int t1 = pick(n), t2 = pick(n);
            if (t1 == t2) t2 = (t1 + 1) % n;
            Instr k(Op::LdConst);
            k.dst = i;
            k.constant = Vec::logical(true);
            b.instrs.push_back(k);
            Instr br(Op::Branch);
            br.args = {Operand::of(i)};
            br.targets = {t1, t2};
            b.instrs.push_back(br);
        }
        c.blocks.push_back(std::move(b));
    }
    return c;
}

bool dominates_by_removal(const Code& c, int a, int b) {
    size_t n = c.blocks.size();
    auto reach = [&](int removed) {
        std::vector<bool> seen(n, false);
        std::vector<int> work;
        if (removed != 0) work.push_back(0);
        while (!work.empty()) {
            int x = work.back();
            work.pop_back();
            if (seen[x]) continue;
            seen[x] = true;
            for (BlockId s : successors(c.blocks[x])) {
                int si = c.index_of(s);
                if (si != removed && !seen[si]) work.push_back(si);
            }
        }
        return seen;
    };
    if (!reach(-1)[b]) return false;
    if (a == b) return true;
    return !reach(a)[b];
}

ScopeState random_scope_state(std::mt19937_64& rng, const ScopeDomain& d, const std::vector<int>& locs) {
    ScopeState s = scope_bottom(d);
    for (auto& c : s.cells) {
        uint64_t r = rng() % 10;
        if (r == 0) {
            c = AbsCell::make_top();
            continue;
        }
        if (r < 4) continue;
        if (rng() % 2) c.locs.insert(AbsCell::kEps);
        for (int l : locs)
            if (rng() % 3 == 0) c.locs.insert(l);
    }
    return s;
}

PromState random_prom_state(std::mt19937_64& rng, size_t n, const std::vector<int>& locs) {
    PromState s(n);
    for (auto& a : s) {
        auto k = static_cast<PromAbs::Kind>(rng() % 5);
        int l = -1;
        if (k == PromAbs::Kind::Forced) {
            if (locs.empty()) k = PromAbs::Kind::Bot;
            else l = locs[rng() % locs.size()];
        }
        a = PromAbs::of(k, l);
    }
    return s;
}

ScopeSoundness::ScopeSoundness(const Program& p) {
    for (auto& [id, fn] : p.functions)
        for (auto& v : fn.versions) {
            Effects fx = compute_effects(v, &fn);
            by_code_.emplace(&v.body, Entry{&v, scope_fixpoint(v, fx)});
        }
}

void ScopeSoundness::on_load(const Code& code, int loc, const EnvObj&, const std::string& var,
                             const Binding* found) {
    auto it = by_code_.find(&code);
    if (it == by_code_.end()) return;
    Locations locs(code);
    const Instr* in = nullptr;
    for (size_t b = 0; b < code.blocks.size() && !in; ++b)
        for (size_t i = 0; i < code.blocks[b].instrs.size(); ++i)
            if (locs.at(static_cast<int>(b), static_cast<int>(i)) == loc) {
                in = &code.blocks[b].instrs[i];
                break;
            }
    if (!in || !in->env.is_reg()) return;
    const AbsCell* cell = it->second.scope.cell(loc, in->env.reg, var);
    if (!cell || cell->top) return;
    ++checked;
    std::ostringstream why;
    if (found) {
        if (found->writer_code != &code || !cell->locs.count(found->writer_loc))
            why << "store at " << found->writer_loc << " not in cell";
    } else if (!cell->has_eps()) {
        why << "unbound but cell lacks eps";
    }
    if (!why.str().empty()) violations.push_back("load of " + var + " at " + std::to_string(loc) + ": " + why.str());
}

std::map<std::string, EnvClass> recount_from_text(const std::string& text) {
    std::map<std::string, EnvClass> out;
    std::istringstream in(text);
    std::string line, fn;
    bool in_promise = false;
    EnvClass cls = EnvClass::None;
    std::vector<std::string> block;  // current block lines
    auto flush_block = [&] {
        if (block.empty()) return;
        bool deopt = block.back().find("Deopt(") != std::string::npos;
        if (!deopt)
            for (auto& l : block) {
                if (l.find("= MkEnv(") == std::string::npos) continue;
                bool stub = l.size() >= 5 && l.compare(l.size() - 5, 5, " stub") == 0;
                if (!stub) cls = EnvClass::Full;
                else if (cls == EnvClass::None) cls = EnvClass::Stub;
            }
        block.clear();
    };
    auto finish_fn = [&] {
        flush_block();
        if (!fn.empty() && fn != "main") out[fn] = cls;
    };
    while (std::getline(in, line)) {
        if (line.rfind("function ", 0) == 0) {
            finish_fn();
            fn = line.substr(9, line.find('(') - 9);
            in_promise = false;
            cls = EnvClass::None;
        } else if (line.rfind("version ", 0) == 0) {
            flush_block();
            in_promise = false;
            cls = EnvClass::None;  // only the last version counts
        } else if (line.rfind("promise ", 0) == 0) {
            flush_block();
            in_promise = true;
        } else if (line.rfind("assume ", 0) == 0 || line.empty()) {
            continue;
        } else if (!in_promise) {
            std::string t = line.substr(line.find_first_not_of(' '));
            if (t.rfind("BB", 0) == 0 && t.back() == ':') {
                flush_block();
            } else {
                block.push_back(t);
            }
        }
    }
    finish_fn();
    return out;
}

std::vector<std::string> check_every_step(const std::string& source, const PipelineOptions& opts) {
    std::vector<std::string> problems;
    const Program p0 = compile_source(source);
    RunResult ref = run(p0, {});
    Program work = p0;
    std::map<std::pair<std::string, size_t>, Version> prev;
    PipelineOptions o = opts;
    o.on_step = [&](const Function& fn, size_t idx, const std::string& pass, const Version& v) {
        auto key = std::make_pair(fn.id, idx);
        auto it = prev.find(key);
        if (it != prev.end() && it->second == v) return;
        if (it == prev.end() && v == fn.baseline()) {
            prev.emplace(key, v);
            return;
        }
        prev.insert_or_assign(key, v);
        std::string where = fn.id + " v" + std::to_string(idx) + " after " + pass;
        for (auto& e : verify(v, VerifyContext{fn.param_count(), fn.nested, &fn}))
            problems.push_back(where + ": verify: " + e);
        Program q = p0;
        q.fn(fn.id).versions.push_back(v);
        RunResult r = run_opt(q);
        if (r.outcome() != ref.outcome() || r.trace != ref.trace)
            problems.push_back(where + ": " + ref.outcome() + " vs " + r.outcome());
    };
    PipelineReport rep = run_pipeline(work, o);
    for (auto& r : rep.rollbacks) problems.push_back("rollback " + r);
    return problems;
}

}  // namespace testing_support
