// Acceptance run: one line per criterion, exit status 1 if any fails.
// Usage: acceptance [N ...]   (no arguments runs all nine)

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "support.hpp"

#include "kdesat/cli.hpp"
#include "kdesat/semantics.hpp"
#include "kdesat/solver.hpp"

using namespace testing;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SolverConfig audited(Logic l) {
    SolverConfig c;
    c.logic = l;
    c.audit = true;
    return c;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

// Audit totals and formulas collected from suites 1 to 5, for 6 and 8.
AuditReport g_audit;
std::vector<std::pair<Formula, Logic>> g_corpus;

Outcome criterion1() {
    double worst = 0;
    int runs = 0;
    std::string bad;
    for (unsigned pi = 1; pi <= 3; ++pi)
        for (unsigned i = 0; i < pi; ++i) {
            std::string a = std::to_string(i), b = std::to_string(i + 1);
            for (const std::string& text :
                 {"[" + a + "][" + b + "]p -> [" + a + "]p", "<" + a + ">p -> <" + a + "><" + b + ">p"}) {
                Formula f = P(text, pi);
                auto t0 = std::chrono::steady_clock::now();
                Verdict v = solve_valid(f, audited(pi_logic(pi)));
                double dt = seconds_since(t0);
                worst = std::max(worst, dt);
                ++runs;
                g_audit.absorb(v.audit);
                g_corpus.emplace_back(Formula::neg(f), pi_logic(pi));
                if (v.result != Result::valid || dt >= 5) bad += " " + text + " (pi " + std::to_string(pi) + ")";
            }
        }
    return {bad.empty(), std::to_string(runs) + " runs, slowest " + fmt(worst) + " s" +
                             (bad.empty() ? "" : ", failing:" + bad)};
}

Outcome criterion2() {
    struct Case {
        std::string text;
        Logic logic;
    };
    std::vector<Case> cases{{"[0]p -> [0][1]p", pi_logic(1)},
                            {"<0><1>p -> <0>p", pi_logic(1)},
                            {"<><>p -> <>p", mono_logic()}};
    double worst = 0;
    std::string bad;
    for (const auto& c : cases) {
        auto t0 = std::chrono::steady_clock::now();
        Formula f = parse(c.text, c.logic);
        Verdict v = solve_valid(f, audited(c.logic));
        g_audit.absorb(v.audit);
        g_corpus.emplace_back(Formula::neg(f), c.logic);
        SearchOptions opt;
        opt.pi = c.logic.pi;
        opt.mono = c.logic.mono();
        auto cm = bounded_model_search(Formula::neg(f), opt);
        bool ok = v.result == Result::invalid && cm &&
                  model_check(cm->first, cm->second, Formula::neg(f), opt.mono) &&
                  is_dense(cm->first, opt.pi, opt.mono).dense();
        double dt = seconds_since(t0);
        worst = std::max(worst, dt);
        if (!ok || dt >= 10) bad += " " + c.text;
    }
    return {bad.empty(), "3 countermodels checked, slowest " + fmt(worst) + " s" +
                             (bad.empty() ? "" : ", failing:" + bad)};
}

std::size_t disagreements(const std::vector<DiffRecord>& rs, std::string& first) {
    std::size_t n = 0;
    for (const auto& r : rs)
        if (!r.agree()) {
            if (n++ == 0) first = r.formula + " seed " + std::to_string(r.seed);
        }
    return n;
}

Outcome criterion3() {
    SolverConfig cfg = audited(pi_logic(1));
    auto corpus = k_fragment_corpus(3, 2000, 1, 7);
    for (const auto& it : corpus) g_corpus.emplace_back(it.formula, pi_logic(1));
    auto rs = differential_run(corpus, Suite::k_fragment, cfg, &g_audit);
    std::string first;
    std::size_t bad = disagreements(rs, first);
    return {bad == 0, std::to_string(rs.size()) + " formulas (exhaustive to size 7 plus 2000 random), " +
                          std::to_string(bad) + " disagreements" + (bad ? ", first: " + first : "")};
}

Outcome criterion4() {
    SolverConfig cfg = audited(pi_logic(2));
    auto corpus = model_truth_corpus(4, 1000, 2, 6, 3);
    for (const auto& it : corpus) g_corpus.emplace_back(it.formula, pi_logic(*it.pi));
    auto rs = differential_run(corpus, Suite::model_truths, cfg, &g_audit);
    std::size_t sat = 0;
    for (const auto& r : rs) sat += r.solver_verdict == "sat";
    std::string first;
    disagreements(rs, first);
    return {sat == rs.size(), std::to_string(sat) + "/" + std::to_string(rs.size()) + " sat" +
                                  (sat == rs.size() ? "" : ", first miss: " + first)};
}

Outcome criterion5() {
    std::size_t unsat = 0, total = 0, replay_fail = 0;
    std::string first;
    for (unsigned pi = 1; pi <= 2; ++pi) {
        SolverConfig cfg = audited(pi_logic(pi));
        auto ts = gen_theorems(50 + pi, 250, cfg);
        std::vector<DiffItem> corpus;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (!replay(ts[i], cfg.logic).empty()) ++replay_fail;
            corpus.push_back({Formula::neg(ts[i].formula), i, pi});
            g_corpus.emplace_back(Formula::neg(ts[i].formula), cfg.logic);
        }
        auto rs = differential_run(corpus, Suite::theorems, cfg, &g_audit);
        for (const auto& r : rs) {
            ++total;
            if (r.solver_verdict == "unsat")
                ++unsat;
            else if (first.empty())
                first = r.formula;
        }
    }
    bool ok = unsat == total && total == 500 && replay_fail == 0;
    return {ok, std::to_string(unsat) + "/" + std::to_string(total) + " unsat, " +
                    std::to_string(replay_fail) + " derivations failed replay" +
                    (first.empty() ? "" : ", first miss: " + first)};
}

Outcome criterion6() {
    std::mt19937_64 rng(6);
    std::size_t checked = 0;
    std::size_t fails[4] = {0, 0, 0, 0};
    while (checked < 10000) {
        auto in = random_split_instance(rng, 12);
        if (!in) continue;
        ++checked;
        unsigned bad = ccs_split_violations(in->s, in->s2, in->v);
        for (int i = 0; i < 4; ++i) fails[i] += (bad >> i) & 1U;
    }
    const AuditReport& a = g_audit;
    bool props = fails[0] + fails[1] + fails[2] + fails[3] == 0;
    bool audit = a.clean() && a.continuations > 0 && a.lassos > 0;
    std::ostringstream d;
    d << checked << " instances, split property failures by item " << fails[0] << "/" << fails[1] << "/"
      << fails[2] << "/" << fails[3] << "; " << a.continuations << " continuations merged with "
      << a.merge_failures << " invalid, " << a.degree_failures << " degree bound failures, "
      << a.lassos << " lassos unrolled with " << a.unroll_failures << " failures, "
      << a.member_depth_failures << " member depth failures";
    return {props && audit, d.str()};
}

Outcome criterion7() {
    std::mt19937_64 rng(7);
    std::size_t seeds = 0, ccs_bad = 0;
    while (seeds < 2000) {
        FormulaSet seed;
        unsigned n = 1 + rng() % 3;
        for (unsigned i = 0; i < n; ++i) seed.insert(random_small(rng, {0, 1}, 2, 6));
        if (csf(seed).count() > 12) continue;
        ++seeds;
        auto ref = keys(powerset_ccs(seed));
        for (CcsMode m : {CcsMode::branch, CcsMode::exhaustive})
            if (keys(enumerate_ccs(seed, m)) != ref) ++ccs_bad;
    }

    std::size_t compared = 0, win_bad = 0, deep = 0;
    for (int t = 0; t < 400 && compared < 40; ++t) {
        unsigned pi = 1 + t % 2;
        std::vector<unsigned> idx;
        for (unsigned k = 0; k <= pi; ++k) idx.push_back(k);
        Formula g = random_small(rng, idx, 1, 4);
        Formula f = Formula::conj(Formula::diamond(0, g), random_small(rng, idx, 2, 6));
        auto us = enumerate_ccs(FormulaSet{f});
        if (us.empty()) continue;
        const FormulaSet& u = us[rng() % us.size()];
        if (csf(u).count() > 10 || u.depth() == 0 || u.depth() > 2) continue;
        if (u.depth() > 1 && deep >= 8) continue;
        FormulaSet seed = box_minus(0, u);
        seed.insert(Formula::neg(Formula::neg(g)));
        auto v0s = enumerate_ccs(seed);
        if (v0s.empty()) continue;
        const FormulaSet& v0 = v0s[rng() % v0s.size()];
        FormulaSet uni = sf(set_union(u, v0));
        if (uni.count() > (u.depth() > 1 ? 9u : 12u)) continue;
        BruteWindows brute(pi_logic(pi), uni);
        SolverConfig cfg;
        cfg.logic = pi_logic(pi);
        std::set<std::string> rk, gk;
        for (const auto& w : brute.windows(u, v0, 0)) rk.insert(key(w));
        auto got = enumerate_windows(u, v0, 0, cfg);
        for (const auto& w : got) gk.insert(key(w));
        if (gk != rk || gk.size() != got.size()) ++win_bad;
        ++compared;
        if (u.depth() > 1) ++deep;
    }
    bool ok = ccs_bad == 0 && win_bad == 0 && compared >= 20;
    return {ok, std::to_string(seeds) + " seeds, " + std::to_string(ccs_bad) + " ccs mismatches; " +
                    std::to_string(compared) + " window inputs (" + std::to_string(deep) +
                    " of depth 2), " + std::to_string(win_bad) + " window mismatches"};
}

Outcome criterion8() {
    std::size_t runs = 0, over = 0;
    std::string first;
    for (const auto& [f, logic] : g_corpus) {
        SolverConfig seen;
        seen.logic = logic;
        Verdict s = solve_sat(f, seen);
        std::size_t longest = 1;
        for (const auto& l : s.lassos) longest = std::max(longest, l.prefix + l.period);
        SolverConfig c = seen;
        c.loop = LoopMode::counter;
        c.counter_bound = longest + 1;
        Verdict v = solve_sat(f, c);
        ++runs;
        unsigned levels = logic.mono() ? 1 : logic.pi + 1;
        if (v.stats.peak_live_windows > std::uint64_t{levels} * (f.depth() + 1)) {
            if (over++ == 0) first = to_string(f);
        }
    }
    std::ostringstream out, err;
    int rc = kdesat::cli::run({"bench", "--pi", "2", "--family", "density-chain", "--max-size", "8"}, out,
                              err);
    std::string fit = "unavailable";
    std::string text = out.str();
    if (rc == 0) {
        std::istringstream lines(text);
        for (std::string line; std::getline(lines, line);) {
            auto j = nlohmann::json::parse(line);
            if (j.contains("fit")) fit = j["fit"].dump();
        }
    }
    return {over == 0, std::to_string(runs) + " counter mode runs, " + std::to_string(over) +
                           " above (pi+1)(d+1)" + (first.empty() ? "" : ", first: " + first) +
                           "; density-chain fit " + fit};
}

std::string capture(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int rc = kdesat::cli::run(args, out, err);
    return std::to_string(rc) + "\n" + out.str() + err.str();
}

Outcome criterion9() {
    std::string dir = "acceptance_determinism";
    std::vector<std::vector<std::string>> cmds{
        {"sat", "--pi", "2", "<0>(p & <1>q) & [0][1][2]~r", "--trace", "/dev/null"},
        {"valid", "--pi", "1", "[0][1]p -> [0]p"},
        {"gen", "--kind", "dense-model", "--seed", "9", "--count", "3"},
        {"gen", "--kind", "formulas", "--seed", "9", "--count", "20"},
        {"gen", "--kind", "theorems", "--seed", "9", "--count", "20", "--pi", "2"},
        {"diff", "--suite", "k-fragment", "--seed", "9", "--count", "50"},
        {"diff", "--suite", "model-truths", "--seed", "9", "--count", "50"},
        {"diff", "--suite", "theorems", "--seed", "9", "--count", "50"},
    };
    std::size_t same = 0;
    for (const auto& c : cmds) same += capture(c) == capture(c);
    // traces and stats through the library as well
    std::size_t lib_same = 0, lib_runs = 0;
    for (std::size_t i = 0; i < g_corpus.size(); i += 97) {
        SolverConfig c;
        c.logic = g_corpus[i].second;
        c.trace = true;
        Verdict a = solve_sat(g_corpus[i].first, c), b = solve_sat(g_corpus[i].first, c);
        ++lib_runs;
        lib_same += a.trace->dump() == b.trace->dump() &&
                    stats_to_json(a.stats, false) == stats_to_json(b.stats, false);
    }
    return {same == cmds.size() && lib_same == lib_runs,
            std::to_string(same) + "/" + std::to_string(cmds.size()) + " CLI outputs identical, " +
                std::to_string(lib_same) + "/" + std::to_string(lib_runs) + " traces identical"};
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<Outcome (*)()> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                   criterion6, criterion7, criterion8, criterion9};
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    // 6, 8 and 9 read what 1 to 5 collected
    std::set<int> run = wanted;
    if (wanted.empty() || wanted.count(6) || wanted.count(8) || wanted.count(9))
        for (int i = 1; i <= 5; ++i) run.insert(i);
    if (wanted.empty())
        for (int i = 6; i <= 9; ++i) run.insert(i);
    bool ok = true;
    for (int n : run) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o = all.at(static_cast<std::size_t>(n - 1))();
        if (!wanted.empty() && !wanted.count(n)) continue;
        ok = ok && o.pass;
        std::cout << "criterion " << n << (o.pass ? " PASS" : " FAIL") << " (" << o.detail << "; "
                  << fmt(seconds_since(t0)) << " s)" << std::endl;
    }
    return ok ? 0 : 1;
}
