#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "kdesat/ccs.hpp"
#include "kdesat/formula.hpp"
#include "kdesat/window.hpp"

namespace kdesat {

enum class LoopMode : std::uint8_t { seen, counter };

struct SolverConfig {
    Logic logic;
    LoopMode loop = LoopMode::seen;
    std::optional<std::uint64_t> counter_bound;
    CcsMode ccs = CcsMode::branch;
    bool trace = false;
    std::uint64_t step_budget = 0;  // 0: unlimited
    double time_budget_s = 0;       // 0: unlimited
    // Per-solve caching of Sat(u) and of chain results. Pure functions of
    // their keys; never used in counter mode.
    bool memoize = true;
    // Re-validate merges, degree bounds and lasso unrolling during the run.
    bool audit = false;
};

struct SolveStats {
    std::uint64_t choice_points = 0;
    std::uint64_t backtracks = 0;
    std::uint64_t peak_live_windows = 0;
    std::uint64_t peak_live_ccs = 0;
    std::uint64_t max_sat_depth = 0;
    std::uint64_t continuation_steps = 0;
    std::uint64_t loops_detected = 0;
    std::uint64_t steps = 0;
    double wall_time = 0;
};

struct AuditReport {
    std::uint64_t continuations = 0;
    std::uint64_t merge_failures = 0;
    std::uint64_t degree_failures = 0;
    std::uint64_t lassos = 0;
    std::uint64_t unroll_failures = 0;
    std::uint64_t member_depth_failures = 0;
    std::vector<std::string> notes;  // first few failure descriptions

    bool clean() const {
        return merge_failures == 0 && degree_failures == 0 && unroll_failures == 0 &&
               member_depth_failures == 0;
    }
    void absorb(const AuditReport& o);
};

struct Lasso {
    unsigned level = 0;
    std::size_t prefix = 0;
    std::size_t period = 0;
};

enum class Result : std::uint8_t { sat, unsat, valid, invalid };
std::string to_string(Result r);

struct Verdict {
    Result result = Result::unsat;
    SolveStats stats;
    std::optional<nlohmann::json> trace;
    std::vector<Lasso> lassos;
    AuditReport audit;

    bool positive() const { return result == Result::sat || result == Result::valid; }
};

class BudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Window enumeration (callbacks return true to stop)
// ---------------------------------------------------------------------------

using CcsList = std::shared_ptr<const std::vector<FormulaSet>>;
using CcsSource = std::function<CcsList(const FormulaSet&)>;
using WindowSink = std::function<bool(const Window&)>;

// Every (k, d(u), d)-window for (u, v0); stops early when the sink asks to.
bool for_each_window(const FormulaSet& u, const FormulaSet& v0, unsigned k, const Logic& logic,
                     const CcsSource& ccs, const WindowSink& sink);
// Every window w2 for (u, w.row(1)) that is a continuation of w.
bool for_each_continuation(const Window& w, const FormulaSet& u, unsigned k, const Logic& logic,
                           const CcsSource& ccs, const WindowSink& sink);

std::vector<Window> enumerate_windows(const FormulaSet& u, const FormulaSet& v0, unsigned k,
                                      const SolverConfig& cfg);
std::vector<Window> enumerate_continuations(const Window& w, const FormulaSet& u, unsigned k,
                                            const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Decision procedure
// ---------------------------------------------------------------------------

class Solver {
public:
    explicit Solver(SolverConfig cfg);
    ~Solver();

    bool sat_ccs(const FormulaSet& u);
    // Runs a fresh chain starting at w (a window for (u, v0) at level k).
    bool sat_w(const Window& w, const FormulaSet& u, unsigned k, const FormulaSet& v0);

    const SolveStats& stats() const;
    const AuditReport& audit() const;
    const std::vector<Lasso>& lassos() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

Verdict solve_sat(Formula f, const SolverConfig& cfg);
Verdict solve_valid(Formula f, const SolverConfig& cfg);
Verdict solve_mono(Formula f, const SolverConfig& cfg);

// Re-validates every window and continuation recorded in a trace.
struct ReplayReport {
    std::uint64_t windows = 0;
    std::uint64_t continuations = 0;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
};
ReplayReport replay_trace(const nlohmann::json& trace, const Logic& logic);

nlohmann::json stats_to_json(const SolveStats& s, bool timing);

}  // namespace kdesat
