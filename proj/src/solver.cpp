#include "kdesat/solver.hpp"

#include <algorithm>
#include <unordered_map>

namespace kdesat {

using nlohmann::json;

std::string to_string(Result r) {
    switch (r) {
        case Result::sat: return "sat";
        case Result::unsat: return "unsat";
        case Result::valid: return "valid";
        case Result::invalid: return "invalid";
    }
    return "?";
}

void AuditReport::absorb(const AuditReport& o) {
    continuations += o.continuations;
    merge_failures += o.merge_failures;
    degree_failures += o.degree_failures;
    lassos += o.lassos;
    unroll_failures += o.unroll_failures;
    member_depth_failures += o.member_depth_failures;
    for (const auto& n : o.notes)
        if (notes.size() < 8) notes.push_back(n);
}

json stats_to_json(const SolveStats& s, bool timing) {
    json j = {{"choice_points", s.choice_points},
              {"backtracks", s.backtracks},
              {"peak_live_windows", s.peak_live_windows},
              {"peak_live_ccs", s.peak_live_ccs},
              {"max_sat_depth", s.max_sat_depth},
              {"continuation_steps", s.continuation_steps},
              {"loops_detected", s.loops_detected},
              {"steps", s.steps}};
    if (timing) j["wall_time"] = s.wall_time;
    return j;
}

namespace {

struct ChainKey {
    Window w;
    FormulaSet u;
    unsigned k;
    friend bool operator==(const ChainKey& a, const ChainKey& b) {
        return a.k == b.k && a.w == b.w && a.u == b.u;
    }
};
struct ChainKeyHash {
    std::size_t operator()(const ChainKey& c) const {
        return c.w.hash() * 31 + c.u.hash() * 7 + c.k;
    }
};

// One SatW chain: the windows of a single diamond (or subwindow) run.
struct Chain {
    unsigned k;
    FormulaSet u;
    FormulaSet v0;
    std::vector<Window> history;  // seen mode: every window entered so far
    std::optional<Window> current;
    std::uint64_t remaining = 0;  // counter mode
    bool top = false;             // started by a diamond, not a subwindow
};

}  // namespace

struct Solver::Impl {
    SolverConfig cfg;
    SolveStats stats;
    AuditReport audit;
    std::vector<Lasso> lassos;
    bool memo;
    std::unordered_map<FormulaSet, CcsList, FormulaSetHash> ccs_cache;
    std::unordered_map<FormulaSet, bool, FormulaSetHash> sat_memo;
    std::unordered_map<ChainKey, bool, ChainKeyHash> chain_memo;
    std::uint64_t live_windows = 0;
    std::uint64_t live_ccs = 0;
    std::uint64_t depth = 0;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    CcsSource source;

    explicit Impl(SolverConfig c) : cfg(std::move(c)) {
        if (cfg.loop == LoopMode::counter && !cfg.counter_bound)
            throw std::invalid_argument("counter loop mode needs a counter bound");
        memo = cfg.memoize && cfg.loop == LoopMode::seen;
        source = [this](const FormulaSet& s) -> CcsList {
            if (memo) {
                auto it = ccs_cache.find(s);
                if (it != ccs_cache.end()) return it->second;
            }
            tick();
            auto list = std::make_shared<const std::vector<FormulaSet>>(enumerate_ccs(s, cfg.ccs));
            if (memo) ccs_cache.emplace(s, list);
            return list;
        };
    }

    const Logic& logic() const { return cfg.logic; }
    bool mono() const { return cfg.logic.mono(); }
    bool tracing(const json* tr) const { return tr != nullptr; }

    void tick() {
        ++stats.steps;
        if (cfg.step_budget != 0 && stats.steps > cfg.step_budget)
            throw BudgetExhausted("step budget exhausted");
        if (cfg.time_budget_s > 0 && (stats.steps & 1023) == 0) {
            double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (el > cfg.time_budget_s) throw BudgetExhausted("time budget exhausted");
        }
    }

    void bump_live(std::int64_t windows, std::int64_t ccs) {
        live_windows += windows;
        live_ccs += ccs;
        stats.peak_live_windows = std::max(stats.peak_live_windows, live_windows);
        stats.peak_live_ccs = std::max(stats.peak_live_ccs, live_ccs);
    }

    // -----------------------------------------------------------------------
    // Sat
    // -----------------------------------------------------------------------

    bool sat_ccs(const FormulaSet& u, json* tr) {
        tick();
        ++depth;
        stats.max_sat_depth = std::max(stats.max_sat_depth, depth);
        bump_live(0, 1);
        struct Leave {
            Impl* s;
            ~Leave() {
                --s->depth;
                s->bump_live(0, -1);
            }
        } leave{this};

        if (memo) {
            auto it = sat_memo.find(u);
            if (it != sat_memo.end()) {
                if (tr) *tr = {{"ccs", to_json(u, mono())}, {"cached", true}};
                return it->second;
            }
        }
        std::size_t mark = lassos.size();
        json diamonds = json::array();
        bool ok = true;
        for (Formula f : u) {
            if (f.kind() != Kind::Neg || f.child().kind() != Kind::Box) continue;
            unsigned i = f.child().index();
            FormulaSet seed = box_minus(relation_at(logic(), i), u);
            seed.insert(Formula::neg(f.child().child()));
            json d;
            if (!diamond(u, i, seed, tr ? &d : nullptr)) {
                ok = false;
                break;
            }
            if (tr) {
                d["diamond"] = to_string(f, mono());
                diamonds.push_back(std::move(d));
            }
        }
        if (!ok) lassos.resize(mark);
        if (memo) sat_memo.emplace(u, ok);
        if (tr && ok) *tr = {{"ccs", to_json(u, mono())}, {"diamonds", diamonds}};
        return ok;
    }

    bool diamond(const FormulaSet& u, unsigned i, const FormulaSet& seed, json* tr) {
        CcsList vs = source(seed);
        if (!mono() && i == cfg.logic.pi) {
            for (const auto& w : *vs) {
                ++stats.choice_points;
                json c;
                if (sat_ccs(w, tr ? &c : nullptr)) {
                    if (tr) *tr = {{"kind", "top"}, {"child", c}};
                    return true;
                }
                ++stats.backtracks;
            }
            return false;
        }
        if (mono() && u.depth() <= 1) {
            if (vs->empty()) return false;
            ++stats.choice_points;
            if (tr) *tr = {{"kind", "shallow"}, {"v0", to_json(vs->front(), true)}};
            return true;
        }
        for (const auto& v0 : *vs) {
            ++stats.choice_points;
            bool found = false;
            for_each_window(u, v0, i, logic(), source, [&](const Window& w) {
                ++stats.choice_points;
                tick();
                json c;
                if (tr) c = chain_header(u, i, v0);
                if (run_chain(w, u, i, v0, tr ? &c : nullptr)) {
                    if (tr) *tr = {{"kind", "window"}, {"chain", c}};
                    found = true;
                    return true;
                }
                ++stats.backtracks;
                return false;
            });
            if (found) return true;
            ++stats.backtracks;
        }
        return false;
    }

    json chain_header(const FormulaSet& u, unsigned k, const FormulaSet& v0) const {
        return {{"level", k}, {"u", to_json(u, mono())}, {"v0", to_json(v0, mono())}};
    }

    bool run_chain(const Window& w, const FormulaSet& u, unsigned k, const FormulaSet& v0,
                   json* tr) {
        Chain chain{k, u, v0, {}, std::nullopt, cfg.counter_bound.value_or(0), true};
        return sat_w(w, chain, tr);
    }

    // -----------------------------------------------------------------------
    // SatW
    // -----------------------------------------------------------------------

    static void finish(json* tr, const Window& w, bool mono, const char* end) {
        if (!tr) return;
        (*tr)["windows"] = json::array({to_json(w, mono)});
        (*tr)["steps"] = json::array();
        (*tr)["end"] = end;
    }

    bool sat_w(const Window& w, Chain& chain, json* tr) {
        tick();
        if (is_leaf(logic(), chain.k, chain.u)) {
            finish(tr, w, mono(), "leaf");
            return true;
        }
        if (w.length() == 0) {
            finish(tr, w, mono(), "shallow");
            return true;
        }
        if (cfg.loop == LoopMode::counter && chain.remaining == 0) {
            finish(tr, w, mono(), "counter");
            return true;
        }
        if (cfg.loop == LoopMode::seen) {
            auto it = std::find(chain.history.begin(), chain.history.end(), w);
            if (it != chain.history.end()) {
                std::size_t h = static_cast<std::size_t>(it - chain.history.begin());
                Lasso l{chain.k, h, chain.history.size() - h};
                ++stats.loops_detected;
                lassos.push_back(l);
                if (cfg.audit) audit_lasso(chain, h);
                finish(tr, w, mono(), "loop");
                if (tr) (*tr)["lasso"] = {{"prefix", l.prefix}, {"period", l.period}};
                return true;
            }
        }
        ChainKey key{w, chain.u, chain.k};
        if (memo) {
            auto it = chain_memo.find(key);
            if (it != chain_memo.end()) {
                finish(tr, w, mono(), "cached");
                return it->second;
            }
        }

        // Enter w as the chain's current window.
        std::optional<Window> prev = chain.current;
        std::int64_t w_members = static_cast<std::int64_t>(member_count(w));
        if (cfg.loop == LoopMode::seen) {
            chain.history.push_back(w);
            bump_live(1, w_members);
        } else {
            std::int64_t old = prev ? static_cast<std::int64_t>(member_count(*prev)) : 0;
            bump_live(prev ? 0 : 1, w_members - old);
        }
        chain.current = w;
        // Subwindow first rows repeat the parent's v_0, so only diamond chains
        // bound every member by d(u).
        if (cfg.audit && chain.top) audit_members(w, chain.u);

        std::size_t mark = lassos.size();
        bool ok = false;
        json rc, sc, tail;
        if (sat_ccs(w.row(0), tr ? &rc : nullptr)) {
            Chain sub{chain.k + 1, w.row(1), w.row(0), {}, std::nullopt,
                      cfg.counter_bound.value_or(0), false};
            if (tr) sc = chain_header(w.row(1), chain.k + 1, w.row(0));
            if (sat_w(w.sub(0), sub, tr ? &sc : nullptr)) {
                for_each_continuation(w, chain.u, chain.k, logic(), source, [&](const Window& w2) {
                    ++stats.choice_points;
                    ++stats.continuation_steps;
                    if (cfg.audit) audit_continuation(w, w2, chain);
                    std::uint64_t saved = chain.remaining;
                    if (cfg.loop == LoopMode::counter) --chain.remaining;
                    json t;
                    bool r = sat_w(w2, chain, tr ? &t : nullptr);
                    chain.remaining = saved;
                    if (r) {
                        ok = true;
                        tail = std::move(t);
                        return true;
                    }
                    ++stats.backtracks;
                    return false;
                });
            }
        }

        // Leave.
        if (cfg.loop == LoopMode::seen) {
            chain.history.pop_back();
            bump_live(-1, -w_members);
        } else {
            std::int64_t old = prev ? static_cast<std::int64_t>(member_count(*prev)) : 0;
            bump_live(prev ? 0 : -1, old - w_members);
        }
        chain.current = prev;

        if (memo) chain_memo.emplace(std::move(key), ok);
        if (!ok) {
            lassos.resize(mark);
            return false;
        }
        if (tr) {
            json windows = json::array({to_json(w, mono())});
            for (auto& x : tail["windows"]) windows.push_back(std::move(x));
            json steps = json::array({json{{"row0", rc}, {"sub", sc}}});
            for (auto& x : tail["steps"]) steps.push_back(std::move(x));
            (*tr)["windows"] = std::move(windows);
            (*tr)["steps"] = std::move(steps);
            (*tr)["end"] = tail["end"];
            if (tail.contains("lasso")) (*tr)["lasso"] = tail["lasso"];
        }
        return true;
    }

    // -----------------------------------------------------------------------
    // Audit
    // -----------------------------------------------------------------------

    void note(const std::string& s) {
        if (audit.notes.size() < 8) audit.notes.push_back(s);
    }

    WindowContext context(const Chain& chain, std::size_t n) const {
        return WindowContext{logic(), chain.u, chain.k, n, LambdaTag::depth, std::nullopt};
    }

    void audit_members(const Window& w, const FormulaSet& u) {
        for (const auto& v : members(w)) {
            if (v.depth() >= u.depth()) {
                ++audit.member_depth_failures;
                note("member deeper than its governing set: " + to_string(v, mono()));
            }
        }
    }

    void audit_continuation(const Window& w1, const Window& w2, const Chain& chain) {
        ++audit.continuations;
        WindowContext ctx = context(chain, w1.length());
        try {
            Window merged = merge_continuation(w1, w2, ctx);
            WindowContext longer = ctx;
            longer.n = ctx.n + 1;
            if (!is_window(merged, longer)) {
                ++audit.merge_failures;
                note("merged window fails validation");
            }
        } catch (const std::exception& e) {
            ++audit.merge_failures;
            note(std::string("merge: ") + e.what());
        }
        if (!degree_bound_holds(w1, w2, chain.u)) {
            ++audit.degree_failures;
            note("degree bound violated");
        }
    }

    // history[h..] is the period; unroll the chain and three more periods.
    void audit_lasso(const Chain& chain, std::size_t h) {
        ++audit.lassos;
        const auto& hist = chain.history;
        WindowContext ctx = context(chain, hist.front().length());
        try {
            Window l = hist.front();
            for (std::size_t j = 1; j < hist.size(); ++j) l = extend_window(l, hist[j], ctx);
            for (int rep = 0; rep < 3; ++rep)
                for (std::size_t j = h; j < hist.size(); ++j) l = extend_window(l, hist[j], ctx);
            WindowContext full = ctx;
            full.n = l.length();
            full.v0_seed = chain.v0;
            if (!is_window(l, full)) {
                ++audit.unroll_failures;
                note("unrolled lasso fails validation");
            }
        } catch (const std::exception& e) {
            ++audit.unroll_failures;
            note(std::string("unroll: ") + e.what());
        }
    }
};

Solver::Solver(SolverConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}
Solver::~Solver() = default;

bool Solver::sat_ccs(const FormulaSet& u) { return impl_->sat_ccs(u, nullptr); }

bool Solver::sat_w(const Window& w, const FormulaSet& u, unsigned k, const FormulaSet& v0) {
    return impl_->run_chain(w, u, k, v0, nullptr);
}

const SolveStats& Solver::stats() const { return impl_->stats; }
const AuditReport& Solver::audit() const { return impl_->audit; }
const std::vector<Lasso>& Solver::lassos() const { return impl_->lassos; }

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

Verdict solve_sat(Formula f, const SolverConfig& cfg) {
    check_indices(f, cfg.logic);
    Solver::Impl s(cfg);
    bool mono = cfg.logic.mono();
    Verdict v;
    json root;
    bool sat = false;
    CcsList us = s.source(FormulaSet{f});
    for (const auto& u : *us) {
        ++s.stats.choice_points;
        json t;
        if (s.sat_ccs(u, cfg.trace ? &t : nullptr)) {
            sat = true;
            root = std::move(t);
            break;
        }
        ++s.stats.backtracks;
    }
    s.stats.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - s.start).count();
    v.result = sat ? Result::sat : Result::unsat;
    v.stats = s.stats;
    v.audit = s.audit;
    if (sat) v.lassos = s.lassos;
    if (cfg.trace) {
        v.trace = json{{"formula", to_string(f, mono)},
                       {"mode", mono ? "kde-mono" : "kde-pi"},
                       {"pi", cfg.logic.pi},
                       {"result", to_string(v.result)},
                       {"root", sat ? root : json(nullptr)}};
    }
    return v;
}

Verdict solve_valid(Formula f, const SolverConfig& cfg) {
    Verdict v = solve_sat(Formula::neg(f), cfg);
    v.result = v.result == Result::sat ? Result::invalid : Result::valid;
    return v;
}

Verdict solve_mono(Formula f, const SolverConfig& cfg) {
    if (!cfg.logic.mono()) throw std::invalid_argument("solve_mono needs kde-mono mode");
    return solve_sat(f, cfg);
}

// ---------------------------------------------------------------------------
// Trace replay
// ---------------------------------------------------------------------------

namespace {

class Replayer {
public:
    Replayer(const Logic& logic, ReplayReport& rep) : logic_(logic), rep_(rep) {}

    void sat_node(const json& node) {
        if (node.is_null() || node.value("cached", false)) return;
        FormulaSet u = set_from_json(node.at("ccs"), logic_);
        if (!is_saturated_consistent(u)) error("recorded set is not a CCS");
        for (const auto& d : node.at("diamonds")) {
            std::string kind = d.at("kind");
            if (kind == "top") sat_node(d.at("child"));
            if (kind == "window") chain(d.at("chain"));
        }
    }

    void chain(const json& c) {
        FormulaSet u = set_from_json(c.at("u"), logic_);
        FormulaSet v0 = set_from_json(c.at("v0"), logic_);
        unsigned k = c.at("level");
        std::vector<Window> ws;
        for (const auto& wj : c.at("windows")) ws.push_back(window_from_json(wj, logic_));
        for (std::size_t j = 0; j < ws.size(); ++j) {
            WindowContext ctx{logic_, u, k, u.depth(), LambdaTag::depth,
                              j == 0 ? v0 : ws[j - 1].row(1)};
            ++rep_.windows;
            if (!is_window(ws[j], ctx)) {
                error("window " + std::to_string(j) + " at level " + std::to_string(k) +
                      " is not valid");
                continue;
            }
            if (j > 0) {
                ctx.v0_seed.reset();
                ++rep_.continuations;
                try {
                    if (!is_continuation(ws[j], ws[j - 1], ctx)) error("broken continuation");
                } catch (const std::exception& e) {
                    error(std::string("continuation: ") + e.what());
                }
            }
        }
        const auto& steps = c.at("steps");
        for (std::size_t j = 0; j < steps.size(); ++j) {
            sat_node(steps[j].at("row0"));
            chain(steps[j].at("sub"));
        }
    }

private:
    void error(const std::string& s) { rep_.errors.push_back(s); }
    const Logic& logic_;
    ReplayReport& rep_;
};

}  // namespace

ReplayReport replay_trace(const json& trace, const Logic& logic) {
    ReplayReport rep;
    try {
        Replayer(logic, rep).sat_node(trace.at("root"));
    } catch (const std::exception& e) {
        rep.errors.push_back(std::string("malformed trace: ") + e.what());
    }
    return rep;
}

}  // namespace kdesat
