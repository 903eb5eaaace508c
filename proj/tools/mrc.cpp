// mrc: compile, optimize and run mini-R programs.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pir/analysis.hpp"
#include "pir/driver.hpp"
#include "pir/lower.hpp"
#include "pir/text.hpp"
#include "pir/verify.hpp"

namespace {

constexpr int kExitProgramError = 1;
constexpr int kExitMismatch = 2;
constexpr int kExitInternal = 3;

struct Flags {
    std::string passes;
    bool no_scope = false;
    bool no_promise_inline = false;
    bool trace = false;
    bool baseline = false;
    std::string dump_ir;
    bool dump_analysis = false;
    uint64_t seed = 0;
    int n = 100;
    int size = 6;
    double reflective_rate = 0.0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

pir::PipelineOptions pipeline(const Flags& f) {
    pir::PipelineConfig cfg;
    cfg.scope = !f.no_scope;
    cfg.promise_inline = !f.no_promise_inline;
    std::stringstream ss(f.passes);
    for (std::string p; std::getline(ss, p, ',');)
        if (!p.empty()) {
            if (!pir::find_pass(p)) throw CLI::ValidationError("--passes", "unknown pass '" + p + "'");
            cfg.passes.push_back(p);
        }
    return pir::make_pipeline(cfg);
}

bool internal_failures(const pir::PipelineReport& rep, const pir::Program& p) {
    bool bad = false;
    for (auto& r : rep.rollbacks) {
        std::cerr << "internal: rolled back " << r << "\n";
        bad = true;
    }
    for (auto& e : pir::verify_program(p)) {
        std::cerr << "internal: verify: " << e << "\n";
        bad = true;
    }
    return bad;
}

void print_trace(const pir::RunResult& r) {
    for (auto& t : r.trace) std::cout << t << "\n";
}

int cmd_run(const std::string& file, const Flags& f) {
    pir::Program p = pir::compile_source(read_file(file));
    pir::PipelineOptions opts = pipeline(f);
    const std::string& stage = f.dump_ir;
    if (stage == "baseline") std::cout << pir::print_program(p);
    if (!stage.empty() && stage != "baseline" && stage != "optimized") {
        if (stage != "all" && !pir::find_pass(stage))
            throw CLI::ValidationError("--dump-ir", "unknown stage '" + stage + "'");
        opts.on_step = [&](const pir::Function& fn, size_t idx, const std::string& pass, const pir::Version& v) {
            if (stage != "all" && stage != pass) return;
            std::cout << "== " << fn.id << " version " << idx << " after " << pass << "\n" << pir::print_ir(v);
        };
    }
    pir::PipelineReport rep;
    if (!f.baseline) rep = pir::run_pipeline(p, opts);
    if (stage == "optimized") std::cout << pir::print_program(p);
    if (f.dump_analysis)
        for (auto& id : p.order) {
            const pir::Function& fn = p.fn(id);
            std::cout << "== analysis " << id << " version " << fn.versions.size() - 1 << "\n"
                      << pir::dump_analysis(fn.versions.back(), &fn);
        }
    if (internal_failures(rep, p)) return kExitInternal;
    pir::RunOptions ro;
    ro.selector = f.baseline ? pir::VersionSelector::Baseline : pir::VersionSelector::Optimized;
    pir::RunResult r = pir::run(p, ro);
    if (f.trace) print_trace(r);
    if (!r.ok) {
        std::cerr << "error: " << pir::error_kind_name(r.error) << ": " << r.message << "\n";
        return kExitProgramError;
    }
    std::cout << r.value << "\n";
    return 0;
}

int cmd_dump(const std::string& file, const Flags& f) {
    pir::Program p = pir::compile_source(read_file(file));
    std::cout << "== stage baseline\n" << pir::print_program(p);
    pir::PipelineOptions opts = pipeline(f);
    std::map<std::pair<std::string, size_t>, std::string> last;
    opts.on_step = [&](const pir::Function& fn, size_t idx, const std::string& pass, const pir::Version& v) {
        std::string text = pir::print_ir(v);
        auto key = std::make_pair(fn.id, idx);
        auto it = last.find(key);
        std::string prev = it == last.end() ? pir::print_ir(fn.baseline()) : it->second;
        if (text != prev) std::cout << "== stage " << pass << " " << fn.id << " version " << idx << "\n" << text;
        last[key] = text;
    };
    pir::PipelineReport rep = pir::run_pipeline(p, opts);
    std::cout << "== stage optimized\n" << pir::print_program(p);
    return internal_failures(rep, p) ? kExitInternal : 0;
}

int report_diff(const pir::DiffResult& d, const Flags& f) {
    if (f.trace) {
        std::cout << "-- baseline trace\n";
        print_trace(d.baseline);
        std::cout << "-- optimized trace\n";
        print_trace(d.optimized);
    }
    std::cout << "baseline: " << d.baseline.outcome() << "\n";
    std::cout << "optimized: " << d.optimized.outcome() << "\n";
    std::cout << "envs_created: " << d.baseline.counters.envs_created << " -> " << d.optimized.counters.envs_created
              << " (stub " << d.optimized.counters.stub_envs_created << ", deopts "
              << d.optimized.counters.deopts_taken << ")\n";
    for (auto& p : d.problems) std::cout << "problem: " << p << "\n";
    if (d.internal_error) return kExitInternal;
    if (!d.match) return kExitMismatch;
    std::cout << "match\n";
    return 0;
}

int cmd_diff(const std::string& file, const Flags& f) {
    return report_diff(pir::diff_program(read_file(file), pipeline(f)), f);
}

int cmd_stats(const std::string& dir, const Flags& f) {
    std::vector<std::filesystem::path> files;
    for (auto& e : std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".mr") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    pir::PipelineOptions opts = pipeline(f);
    for (auto& path : files) {
        pir::StatsRow r = pir::program_stats(path.stem().string(), read_file(path.string()), opts);
        std::cout << pir::format_stats(r) << "\n";
    }
    return 0;
}

int cmd_fuzz(const Flags& f) {
    pir::PipelineOptions opts = pipeline(f);
    int mismatches = 0, internal = 0, errors = 0;
    for (int i = 0; i < f.n; ++i) {
        uint64_t seed = f.seed + static_cast<uint64_t>(i);
        std::string src = pir::generate_program(seed, f.size, f.reflective_rate);
        pir::DiffResult d = pir::diff_program(src, opts);
        if (!d.baseline.ok) ++errors;
        if (d.internal_error) ++internal;
        if (!d.match) ++mismatches;
        if (d.internal_error || !d.match) {
            std::cout << "seed " << seed << ":\n";
            for (auto& p : d.problems) std::cout << "  " << p << "\n";
        }
    }
    std::cout << "fuzz n=" << f.n << " seed=" << f.seed << " mismatches=" << mismatches << " internal=" << internal
              << " program_errors=" << errors << "\n";
    if (internal) return kExitInternal;
    return mismatches ? kExitMismatch : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mini-R compiler and PIR optimizer"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--passes", f.passes, "comma-separated pass list (" + [] {
        std::string s;
        for (auto& n : pir::pass_names()) s += (s.empty() ? "" : ",") + n;
        return s;
    }() + ")");
    app.add_flag("--no-scope", f.no_scope, "drop scope resolution");
    app.add_flag("--no-promise-inline", f.no_promise_inline, "drop promise inlining");
    app.add_flag("--trace", f.trace, "print EVT records");
    app.add_flag("--baseline", f.baseline, "run: skip optimization");
    app.add_option("--dump-ir", f.dump_ir, "baseline, optimized, all, or a pass name");
    app.add_flag("--dump-analysis", f.dump_analysis, "print analysis tables");
    app.add_option("--seed", f.seed, "first fuzz seed");
    app.add_option("--n", f.n, "number of fuzz programs");
    app.add_option("--size", f.size, "fuzz program size")->check(CLI::Range(0, pir::kMaxGenSize));
    app.add_option("--reflective-rate", f.reflective_rate, "chance of reflective statements")
        ->check(CLI::Range(0.0, 1.0));

    std::string file, dir;
    auto* run = app.add_subcommand("run", "optimize and execute a program");
    run->add_option("file", file)->required();
    auto* dump = app.add_subcommand("dump", "print IR at each stage");
    dump->add_option("file", file)->required();
    auto* diff = app.add_subcommand("diff", "compare baseline and optimized runs");
    diff->add_option("file", file)->required();
    auto* stats = app.add_subcommand("stats", "environment statistics over a corpus");
    stats->add_option("dir", dir)->required();
    auto* fuzz = app.add_subcommand("fuzz", "differential testing on generated programs");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(file, f);
        if (*dump) return cmd_dump(file, f);
        if (*diff) return cmd_diff(file, f);
        if (*stats) return cmd_stats(dir, f);
        if (*fuzz) return cmd_fuzz(f);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const mr::SyntaxError& e) {
        std::cerr << "syntax error at " << e.line << ":" << e.col << ": " << e.what() << "\n";
        return kExitProgramError;
    } catch (const std::exception& e) {
        std::cerr << "internal: " << e.what() << "\n";
        return kExitInternal;
    }
    return 0;
}
