#include <sstream>

#include "pir/analysis.hpp"
#include "pir/text.hpp"

namespace pir {

const char* env_escape_name(EnvEscape e) {
    switch (e) {
        case EnvEscape::NoEscape: return "NoEscape";
        case EnvEscape::StubEligible: return "StubEligible";
        case EnvEscape::Escapes: return "Escapes";
    }
    return "?";
}

std::map<Reg, EnvEscape> escape_analysis(const Version& v, const Effects& fx) {
    (void)v;
    std::map<Reg, EnvEscape> out;
    for (Reg e : fx.tracked) {
        if (fx.value_use.count(e) || fx.promise_written.count(e))
            out[e] = EnvEscape::Escapes;
        else if (fx.exposed.count(e))
            out[e] = EnvEscape::StubEligible;
        else
            out[e] = EnvEscape::NoEscape;
    }
    return out;
}

namespace {

std::string cell_text(const AbsCell& c) {
    if (c.top) return "T";
    std::string s = "{";
    bool first = true;
    for (int l : c.locs) {
        if (!first) s += ",";
        first = false;
        s += l == AbsCell::kEps ? "eps" : std::to_string(l);
    }
    return s + "}";
}

std::string prom_text(const PromAbs& p) {
    switch (p.kind) {
        case PromAbs::Kind::Unreached: return "-";
        case PromAbs::Kind::Bot: return "bot";
        case PromAbs::Kind::Forced: return "forced@" + std::to_string(p.loc);
        case PromAbs::Kind::Leaked: return "leaked";
        case PromAbs::Kind::Top: return "T";
    }
    return "?";
}

}  // namespace

std::string dump_analysis(const Version& v, const Function* fn) {
    Effects fx = compute_effects(v, fn);
    ScopeResult sr = scope_fixpoint(v, fx);
    PromiseResult pr = promise_fixpoint(v, fx);
    auto esc = escape_analysis(v, fx);
    std::set<Reg> envs = env_registers(v);
    std::ostringstream os;
    Locations locs(v.body);
    for (size_t b = 0; b < v.body.blocks.size(); ++b) {
        for (size_t i = 0; i < v.body.blocks[b].instrs.size(); ++i) {
            int l = locs.at(static_cast<int>(b), static_cast<int>(i));
            os << l << "\t" << print_instr(v.body.blocks[b].instrs[i], envs) << "\n";
            const ScopeState& s = sr.before[l];
            for (size_t e = 0; e < sr.domain.envs.size(); ++e)
                for (size_t x = 0; x < sr.domain.vars.size(); ++x) {
                    const AbsCell& c = s.cells[sr.domain.cell(static_cast<int>(e), static_cast<int>(x))];
                    if (c.empty()) continue;
                    os << "\t  e" << sr.domain.envs[e] << "." << sr.domain.vars[x] << " = " << cell_text(c) << "\n";
                }
            for (auto& [reg, k] : pr.mkargs) {
                const PromAbs& p = pr.before[l][k];
                if (p.kind == PromAbs::Kind::Unreached) continue;
                os << "\t  %" << reg << " : " << prom_text(p) << "\n";
            }
        }
    }
    for (auto& [e, k] : esc) os << "env e" << e << " " << env_escape_name(k) << "\n";
    for (auto& [reg, l] : pr.inlinable) os << "promise %" << reg << " dominating force at " << l << "\n";
    return os.str();
}

}  // namespace pir
