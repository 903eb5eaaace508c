#include <algorithm>
#include <random>

#include "pir/driver.hpp"

namespace pir {

namespace {

struct Scope {
    std::vector<std::string> vars;
    std::vector<std::pair<std::string, int>> fns;  // name, arity
    bool in_function = false;
    int closure_depth = 0;
    bool in_loop = false;

    bool has(const std::string& v) const { return std::find(vars.begin(), vars.end(), v) != vars.end(); }
    void add(const std::string& v) {
        if (!has(v)) vars.push_back(v);
    }
};

const char* const kPool[] = {"x", "y", "z", "w"};

class Gen {
  public:
    Gen(uint64_t seed, int size, double reflective) : rng_(seed), size_(size), reflective_(reflective) {}

    std::string program() {
        Scope top;
        std::string out;
        int nfun = 1 + std::min(size_, kMaxGenSize) / 2;
        for (int k = 0; k < nfun; ++k) {
            std::string name = "f" + std::to_string(k);
            int arity = pick(3);
            out += name + " <- " + function(top, arity) + "\n";
            top.fns.push_back({name, arity});
        }
        int nstmt = 1 + pick(2 + size_ / 3);
        for (int i = 0; i < nstmt; ++i) out += statement(top, 0) + "\n";
        out += expr(top, 0) + "\n";
        return out;
    }

  private:
    std::mt19937_64 rng_;
    int size_;
    double reflective_;
    int counters_ = 0;
    int closures_ = 0;

    int pick(int n) { return n <= 0 ? 0 : static_cast<int>(rng_() % static_cast<uint64_t>(n)); }
    bool chance(double p) { return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < p; }

    std::string literal() { return std::to_string(pick(10)); }

    std::string function(const Scope& outer, int arity) {
        Scope s;
        s.in_function = true;
        s.fns = outer.fns;
        s.closure_depth = outer.closure_depth + (outer.in_function ? 1 : 0);
        if (outer.in_function) s.vars = outer.vars;
        std::string params;
        for (int i = 0; i < arity; ++i) {
            std::string p = "p" + std::to_string(s.closure_depth) + std::to_string(i);
            params += (i ? ", " : "") + p;
            s.add(p);
        }
        std::string body = "{ ";
        int n = 1 + pick(2 + size_ / 3);
        for (int i = 0; i < n; ++i) body += statement(s, 0) + "; ";
        body += expr(s, 0) + " }";
        return "function(" + params + ") " + body;
    }

    std::string var_or_literal(const Scope& s) {
        if (s.vars.empty() || chance(0.3)) return literal();
        return s.vars[pick(static_cast<int>(s.vars.size()))];
    }

    std::string arg(Scope& s, int d) {
        // A lazy argument that writes to the caller's frame when forced.
        std::vector<std::string> pool;
        for (auto& v : s.vars)
            if (v[0] != 'p' && v[0] != 'i') pool.push_back(v);
        if (!pool.empty() && chance(0.15)) {
            const std::string& v = pool[pick(static_cast<int>(pool.size()))];
            return "{ " + v + " <- " + v + " + 1; " + v + " }";
        }
        return expr(s, d + 1);
    }

    std::string call(Scope& s, int d) {
        auto& [name, arity] = s.fns[pick(static_cast<int>(s.fns.size()))];
        std::string out = name + "(";
        for (int i = 0; i < arity; ++i) out += (i ? ", " : "") + arg(s, d);
        return out + ")";
    }

    std::string expr(Scope& s, int d) {
        if (d >= 3) return var_or_literal(s);
        switch (pick(10)) {
            case 0:
            case 1:
                return literal();
            case 2:
            case 3:
                return var_or_literal(s);
            case 4:
            case 5: {
                static const char* const ops[] = {"+", "-", "*", "<", "=="};
                return "(" + expr(s, d + 1) + " " + ops[pick(5)] + " " + expr(s, d + 1) + ")";
            }
            case 6:
            case 7:
                if (!s.fns.empty()) return call(s, d);
                return var_or_literal(s);
            case 8:
                return "if (" + expr(s, d + 1) + ") " + expr(s, d + 1) + " else " + expr(s, d + 1);
            default:
                if (chance(0.3)) return "c(" + expr(s, d + 1) + ", " + expr(s, d + 1) + ")";
                return var_or_literal(s);
        }
    }

    std::string block(Scope& s, int d) {
        Scope inner = s;
        std::string out = "{ ";
        int n = 1 + pick(2);
        for (int i = 0; i < n; ++i) out += statement(inner, d + 1) + "; ";
        out += expr(inner, 1) + " }";
        // Closures defined inside stay local to the block as far as calls go.
        return out;
    }

    std::string reflective(Scope& s) {
        std::string v = kPool[pick(4)];
        switch (pick(s.in_function ? 6 : 2)) {
            case 0:
                s.add(v);
                return "assign(\"" + v + "\", " + expr(s, 2) + ", environment())";
            case 1: {
                if (s.vars.empty()) return "environment()";
                return "get(\"" + s.vars[pick(static_cast<int>(s.vars.size()))] + "\", environment())";
            }
            case 2:
                return "assign(\"" + v + "\", " + expr(s, 2) + ", parent.frame())";
            case 3: {
                std::vector<std::string> pool;
                for (auto& x : s.vars)
                    if (x[0] != 'i') pool.push_back(x);
                if (pool.empty()) return "environment()";
                std::string x = pool[pick(static_cast<int>(pool.size()))];
                std::erase(s.vars, x);
                return "rm(\"" + x + "\", environment())";
            }
            case 4:
                return "assign(\"" + v + "\", " + expr(s, 2) + ", sys.frame(-1))";
            default:
                return "get(\"" + v + "\", parent.frame())";
        }
    }

    std::string statement(Scope& s, int d) {
        if (reflective_ > 0 && chance(reflective_)) return reflective(s);
        int k = pick(10);
        if (d >= 2) k = std::min(k, 4);
        switch (k) {
            case 0:
            case 1:
            case 2:
            case 3: {
                std::string v = kPool[pick(4)];
                std::string rhs = expr(s, 0);
                s.add(v);
                return v + " <- " + rhs;
            }
            case 4:
                if (!s.fns.empty()) return call(s, 0);
                return expr(s, 0);
            case 5:
            case 6: {
                std::string c = expr(s, 1);
                return "if (" + c + ") " + block(s, d) + " else " + block(s, d);
            }
            case 7: {
                if (s.in_loop) return expr(s, 0);
                std::string i = "i" + std::to_string(counters_++);
                Scope inner = s;
                inner.in_loop = true;
                inner.add(i);
                std::string body = block(inner, d);
                s.add(i);
                return i + " <- 0; while (" + i + " < " + std::to_string(1 + pick(3)) + ") { " + i + " <- " + i +
                       " + 1; " + body + " }";
            }
            default: {
                if (s.closure_depth >= 1 && s.in_function) return expr(s, 0);
                std::string h = "h" + std::to_string(closures_++);
                int arity = pick(3);
                std::string def = h + " <- " + function(s, arity);
                s.fns.push_back({h, arity});
                return def;
            }
        }
    }
};

}  // namespace

std::string generate_program(uint64_t seed, int size, double reflective_rate) {
    Gen g(seed, std::clamp(size, 0, kMaxGenSize), reflective_rate);
    return g.program();
}

}  // namespace pir
