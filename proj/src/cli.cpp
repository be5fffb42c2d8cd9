#include "kdesat/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kdesat/oracle.hpp"
#include "kdesat/semantics.hpp"
#include "kdesat/solver.hpp"

namespace kdesat::cli {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    unsigned pi = 1;
    std::string mode = "kde-pi";
    std::string loop = "seen";
    std::uint64_t counter_bound = 0;
    std::string ccs = "branch";
    std::string trace;
    std::string trace_dot;
    std::uint64_t budget_steps = 0;
    bool pretty = false;
    bool timing = false;
    bool audit = false;

    std::string formula;
    std::string file;

    std::string model;
    std::string world;

    std::string kind;
    std::string family;
    std::string suite;
    std::uint64_t seed = 1;
    std::size_t count = 0;
    std::size_t size = 0;
    unsigned depth = 3;
    unsigned max_size = 12;
    unsigned exhaustive_size = 7;
    std::string out;
};

void add_logic(CLI::App* c, Options& o) {
    c->add_option("--pi", o.pi, "highest modality index");
    c->add_option("--mode", o.mode, "kde-pi (default), or kde / kde-mono for the monomodal logic")
        ->check(CLI::IsMember({"kde", "kde-mono", "kde-pi"}));
}

void add_solver(CLI::App* c, Options& o) {
    add_logic(c, o);
    c->add_option("--loop", o.loop, "loop detection")->check(CLI::IsMember({"seen", "counter"}));
    c->add_option("--counter-bound", o.counter_bound, "chain length bound for --loop counter");
    c->add_option("--ccs", o.ccs, "CCS enumeration")
        ->check(CLI::IsMember({"branch", "exhaustive", "minimal"}));
    c->add_option("--budget-steps", o.budget_steps, "abort after this many steps");
    c->add_flag("--audit", o.audit, "re-validate merges and lassos during the run");
    c->add_flag("--timing", o.timing, "include wall times in the output");
    c->add_flag("--pretty", o.pretty, "human-readable output");
}

Logic logic_of(const Options& o) {
    Logic l;
    l.pi = o.pi;
    l.mode = (o.mode == "kde" || o.mode == "kde-mono") ? Mode::kde_mono : Mode::kde_pi;
    if (l.mono()) l.pi = 1;
    return l;
}

SolverConfig config_of(const Options& o, const CLI::App* c) {
    SolverConfig cfg;
    cfg.logic = logic_of(o);
    cfg.loop = o.loop == "counter" ? LoopMode::counter : LoopMode::seen;
    bool has_bound = c->count("--counter-bound") > 0;
    if (has_bound && cfg.loop != LoopMode::counter)
        throw UsageError("--counter-bound needs --loop counter");
    if (cfg.loop == LoopMode::counter) {
        if (!has_bound) throw UsageError("--loop counter needs --counter-bound");
        cfg.counter_bound = o.counter_bound;
    }
    cfg.ccs = o.ccs == "exhaustive" ? CcsMode::exhaustive
              : o.ccs == "minimal"  ? CcsMode::minimal
                                    : CcsMode::branch;
    cfg.step_budget = o.budget_steps;
    cfg.audit = o.audit;
    cfg.trace = !o.trace.empty() || !o.trace_dot.empty();
    return cfg;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write " + path);
    f << text;
}

Formula input_formula(const Options& o, const Logic& logic) {
    if (o.formula.empty() == o.file.empty()) throw UsageError("give exactly one of a formula or --file");
    std::string text = o.file.empty() ? o.formula : read_file(o.file);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    Formula f = parse(text, logic);
    check_indices(f, logic);
    return f;
}

std::string dump(const json& j, bool pretty) { return pretty ? j.dump(2) : j.dump(); }

// ---------------------------------------------------------------------------
// DOT rendering of a trace
// ---------------------------------------------------------------------------

class Dot {
public:
    std::string render(const json& trace) {
        os_ << "digraph trace {\n  node [shape=box, fontname=monospace];\n";
        if (trace.contains("root") && !trace["root"].is_null()) sat(trace["root"]);
        os_ << "}\n";
        return os_.str();
    }

private:
    static std::string esc(const std::string& s) {
        std::string r;
        for (char c : s) {
            if (c == '"' || c == '\\') r += '\\';
            r += c;
        }
        return r;
    }
    static std::string set_label(const json& s) {
        std::string r = "{";
        for (std::size_t i = 0; i < s.size(); ++i) r += (i ? ", " : "") + s[i].get<std::string>();
        return r + "}";
    }
    std::string node(const std::string& label) {
        std::string id = "n" + std::to_string(next_++);
        os_ << "  " << id << " [label=\"" << esc(label) << "\"];\n";
        return id;
    }
    void edge(const std::string& a, const std::string& b, const std::string& label) {
        os_ << "  " << a << " -> " << b << " [label=\"" << esc(label) << "\"];\n";
    }

    std::string sat(const json& n) {
        std::string id = node(set_label(n.at("ccs")) + (n.value("cached", false) ? " (cached)" : ""));
        if (!n.contains("diamonds")) return id;
        for (const auto& d : n["diamonds"]) {
            std::string kind = d.at("kind");
            if (kind == "top") edge(id, sat(d.at("child")), d.at("diamond"));
            else if (kind == "shallow")
                edge(id, node(set_label(d.at("v0"))), d.at("diamond"));
            else edge(id, chain(d.at("chain")), d.at("diamond"));
        }
        return id;
    }

    std::string chain(const json& c) {
        std::string label = "chain level " + std::to_string(c.at("level").get<unsigned>()) + ", " +
                            std::to_string(c.at("windows").size()) + " windows, end " +
                            c.at("end").get<std::string>();
        std::string id = node(label);
        const auto& steps = c.at("steps");
        for (std::size_t i = 0; i < steps.size(); ++i) {
            edge(id, sat(steps[i].at("row0")), "row0 #" + std::to_string(i));
            edge(id, chain(steps[i].at("sub")), "sub #" + std::to_string(i));
        }
        return id;
    }

    std::ostringstream os_;
    int next_ = 0;
};

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_decide(const Options& o, const CLI::App* c, bool validity, std::ostream& out,
               std::ostream& err) {
    SolverConfig cfg = config_of(o, c);
    Formula f = input_formula(o, cfg.logic);
    Verdict v;
    try {
        v = validity ? solve_valid(f, cfg) : solve_sat(f, cfg);
    } catch (const BudgetExhausted& e) {
        err << "error: " << e.what() << "\n";
        out << dump({{"result", "budget"}, {"error", e.what()}}, o.pretty) << "\n";
        return 2;
    }
    if (v.trace) {
        if (!o.trace.empty()) write_file(o.trace, v.trace->dump(2) + "\n");
        if (!o.trace_dot.empty()) write_file(o.trace_dot, Dot().render(*v.trace));
    }
    json j{{"result", to_string(v.result)}, {"stats", stats_to_json(v.stats, o.timing)}};
    if (o.audit) {
        j["audit"] = {{"continuations", v.audit.continuations},
                      {"lassos", v.audit.lassos},
                      {"clean", v.audit.clean()}};
        if (!v.audit.notes.empty()) j["audit"]["notes"] = v.audit.notes;
    }
    if (o.pretty) {
        out << to_string(v.result) << "\n";
        for (const auto& [k, val] : j["stats"].items()) out << "  " << k << ": " << val << "\n";
        if (j.contains("audit")) out << "  audit: " << j["audit"].dump() << "\n";
    } else {
        out << j.dump() << "\n";
    }
    return v.positive() ? 0 : 1;
}

int cmd_check(const Options& o, std::ostream& out) {
    Logic logic = logic_of(o);
    KripkeModel m = model_from_json(json::parse(read_file(o.model)));
    Formula f = input_formula(o, logic);
    std::size_t w = m.world(o.world);
    bool value = model_check(m, w, f, logic.mono());
    DensityReport d = is_dense(m, logic.pi, logic.mono());
    json viol = json::array();
    for (const auto& x : d.violations)
        viol.push_back({{"index", x.i}, {"from", m.name(x.s)}, {"to", m.name(x.t)}});
    json j{{"value", value}, {"dense", d.dense()}, {"violations", viol}};
    out << dump(j, o.pretty) << "\n";
    return value ? 0 : 1;
}

int cmd_gen(const Options& o, std::ostream& out) {
    Logic logic = logic_of(o);
    std::ostringstream os;
    if (o.kind == "dense-model") {
        DenseFamily fam = o.family == "witnessed" ? DenseFamily::witnessed : DenseFamily::reflexive;
        if (!o.family.empty() && o.family != "witnessed" && o.family != "reflexive")
            throw UsageError("--family must be reflexive or witnessed for dense models");
        KripkeModel m = gen_dense_model(o.seed, logic.pi, o.size ? o.size : 4, {"p", "q", "r"}, fam,
                                        logic.mono());
        os << dump(model_to_json(m), o.pretty) << "\n";
    } else if (o.kind == "formulas") {
        RandomFormulaSpec spec;
        spec.atoms = {"p", "q", "r"};
        spec.indices.clear();
        if (logic.mono()) spec.indices = {0};
        else
            for (unsigned k = 0; k <= logic.pi; ++k) spec.indices.push_back(k);
        spec.max_depth = o.depth;
        spec.max_size = o.max_size;
        std::mt19937_64 rng(o.seed);
        for (std::size_t i = 0; i < (o.count ? o.count : 10); ++i) {
            std::uint64_t s = rng();
            os << json{{"formula", to_string(random_formula(s, spec), logic.mono())}, {"seed", s}}.dump()
               << "\n";
        }
    } else if (o.kind == "theorems") {
        SolverConfig cfg;
        cfg.logic = logic;
        std::mt19937_64 rng(o.seed);
        for (std::size_t i = 0; i < (o.count ? o.count : 10); ++i) {
            std::uint64_t s = rng();
            json j = theorem_to_json(gen_theorems(s, 1, cfg).front(), logic.mono());
            j["seed"] = s;
            os << j.dump() << "\n";
        }
    } else {
        throw UsageError("--kind must be dense-model, formulas or theorems");
    }
    if (o.out.empty()) out << os.str();
    else write_file(o.out, os.str());
    return 0;
}

int cmd_diff(const Options& o, const CLI::App* c, std::ostream& out, std::ostream& err) {
    SolverConfig cfg = config_of(o, c);
    std::vector<DiffItem> corpus;
    Suite suite;
    if (o.suite == "k-fragment") {
        suite = Suite::k_fragment;
        corpus = k_fragment_corpus(o.seed, o.count ? o.count : 2000, cfg.logic.pi, o.exhaustive_size);
    } else if (o.suite == "theorems") {
        suite = Suite::theorems;
        corpus = theorem_corpus(o.seed, o.count ? o.count : 500, cfg);
    } else if (o.suite == "model-truths") {
        suite = Suite::model_truths;
        corpus = model_truth_corpus(o.seed, o.count ? o.count : 1000, cfg.logic.pi, 6, o.depth);
    } else {
        throw UsageError("--suite must be k-fragment, theorems or model-truths");
    }
    AuditReport audit;
    auto records = differential_run(corpus, suite, cfg, &audit);
    std::size_t bad = 0;
    for (const auto& r : records) {
        out << to_json(r).dump() << "\n";
        if (!r.agree()) ++bad;
    }
    err << json{{"items", records.size()}, {"disagreements", bad}}.dump() << "\n";
    return bad == 0 ? 0 : 1;
}

Formula bench_formula(const std::string& family, std::size_t n, const Logic& logic) {
    if (family == "density-chain") {
        if (logic.mono() || logic.pi == 0) throw UsageError("density-chain needs --pi >= 1");
        Formula f = Formula::diamond(0, Formula::top());
        for (std::size_t j = 1; j <= n; ++j)
            f = Formula::conj(f, Formula::box(0, Formula::box(1, Formula::atom("p" + std::to_string(j)))));
        return f;
    }
    if (family == "nested-diamond") {
        Formula f = Formula::atom("p" + std::to_string(n));
        for (std::size_t j = n; j >= 1; --j) {
            Formula d = Formula::diamond(0, f);
            f = j == 1 ? d : Formula::conj(Formula::atom("p" + std::to_string(j - 1)), d);
        }
        return f;
    }
    throw UsageError("--family must be density-chain or nested-diamond");
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<std::pair<double, double>>& pts) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        if (x <= 0 || y <= 0) continue;
        double lx = std::log(x), ly = std::log(y);
        n += 1;
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double den = n * sxx - sx * sx;
    if (n < 2 || den == 0) return 0.0;
    return std::round((n * sxy - sx * sy) / den * 1000) / 1000 + 0.0;
}

int cmd_bench(const Options& o, const CLI::App* c, std::ostream& out, std::ostream& err) {
    SolverConfig cfg = config_of(o, c);
    std::size_t max_n = o.size ? o.size : 6;
    std::vector<std::pair<double, double>> ccs_pts, win_pts;
    json rows = json::array();
    for (std::size_t n = 1; n <= max_n; ++n) {
        Formula f = bench_formula(o.family, n, cfg.logic);
        json row{{"n", n}, {"size", f.size()}, {"depth", f.depth()}};
        try {
            auto t0 = std::chrono::steady_clock::now();
            Verdict v = solve_sat(f, cfg);
            double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            row["result"] = to_string(v.result);
            row["peak_live_windows"] = v.stats.peak_live_windows;
            row["peak_live_ccs"] = v.stats.peak_live_ccs;
            row["steps"] = v.stats.steps;
            if (o.timing) row["time_s"] = dt;
            ccs_pts.emplace_back(f.size(), static_cast<double>(v.stats.peak_live_ccs));
            win_pts.emplace_back(f.size(), static_cast<double>(v.stats.peak_live_windows));
        } catch (const BudgetExhausted& e) {
            row["result"] = "budget";
            err << "n=" << n << ": " << e.what() << "\n";
        }
        rows.push_back(row);
    }
    unsigned ref = cfg.logic.mono() ? 0 : 2 * cfg.logic.pi + 4;
    json fit{{"peak_live_ccs_exponent", loglog_slope(ccs_pts)},
             {"peak_live_windows_exponent", loglog_slope(win_pts)}};
    if (!cfg.logic.mono()) fit["reference_degree"] = ref;
    if (o.pretty) {
        out << std::left << std::setw(4) << "n" << std::setw(6) << "size" << std::setw(8) << "result"
            << std::setw(14) << "peak_windows" << std::setw(10) << "peak_ccs" << "steps\n";
        for (const auto& r : rows) {
            out << std::setw(4) << r["n"].dump() << std::setw(6) << r["size"].dump() << std::setw(8)
                << r["result"].get<std::string>() << std::setw(14)
                << r.value("peak_live_windows", json(0)).dump() << std::setw(10)
                << r.value("peak_live_ccs", json(0)).dump() << r.value("steps", json(0)).dump() << "\n";
        }
        out << "fit: " << fit.dump() << "\n";
    } else {
        for (const auto& r : rows) out << json{{"family", o.family}, {"row", r}}.dump() << "\n";
        out << json{{"family", o.family}, {"fit", fit}}.dump() << "\n";
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Decision procedure for bounded-density multimodal logics"};
    app.require_subcommand(1);
    Options o;

    auto* sat = app.add_subcommand("sat", "decide satisfiability");
    auto* valid = app.add_subcommand("valid", "decide validity");
    for (auto* c : {sat, valid}) {
        add_solver(c, o);
        c->add_option("formula", o.formula, "formula text");
        c->add_option("--file", o.file, "read the formula from a file");
        c->add_option("--trace", o.trace, "write the solver trace as JSON");
        c->add_option("--trace-dot", o.trace_dot, "write the solver trace as DOT");
    }

    auto* check = app.add_subcommand("check", "model-check a formula at a world");
    add_logic(check, o);
    check->add_option("--model", o.model, "model JSON")->required();
    check->add_option("--world", o.world, "world name")->required();
    check->add_option("formula", o.formula, "formula text");
    check->add_option("--file", o.file, "read the formula from a file");
    check->add_flag("--pretty", o.pretty, "indented output");

    auto* gen = app.add_subcommand("gen", "generate corpora");
    add_logic(gen, o);
    gen->add_option("--kind", o.kind, "dense-model, formulas or theorems")->required();
    gen->add_option("--seed", o.seed, "random seed");
    gen->add_option("--count", o.count, "number of items");
    gen->add_option("--size", o.size, "worlds in a dense model");
    gen->add_option("--family", o.family, "reflexive or witnessed");
    gen->add_option("--depth", o.depth, "maximum modal depth of formulas");
    gen->add_option("--max-size", o.max_size, "maximum formula size");
    gen->add_option("--out", o.out, "output file");
    gen->add_flag("--pretty", o.pretty, "indented output");

    auto* diff = app.add_subcommand("diff", "run a differential suite");
    add_solver(diff, o);
    diff->add_option("--suite", o.suite, "k-fragment, theorems or model-truths")->required();
    diff->add_option("--seed", o.seed, "random seed");
    diff->add_option("--count", o.count, "random items");
    diff->add_option("--depth", o.depth, "maximum modal depth for model truths");
    diff->add_option("--exhaustive-size", o.exhaustive_size, "exhaustive k-fragment formula size");

    auto* bench = app.add_subcommand("bench", "scaling benchmark");
    add_solver(bench, o);
    bench->add_option("--family", o.family, "density-chain or nested-diamond")->required();
    bench->add_option("--max-size", o.size, "largest family member");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (*sat) return cmd_decide(o, sat, false, out, err);
        if (*valid) return cmd_decide(o, valid, true, out, err);
        if (*check) return cmd_check(o, out);
        if (*gen) return cmd_gen(o, out);
        if (*diff) return cmd_diff(o, diff, out, err);
        if (*bench) return cmd_bench(o, bench, out, err);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const BudgetExhausted& e) {
        err << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return 2;
}

}  // namespace kdesat::cli
