#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kdesat/formula.hpp"
#include "kdesat/solver.hpp"

namespace kdesat {

// K tableau on its own term representation. All boxes must share one index.
bool k_sat(Formula f);

// ---------------------------------------------------------------------------
// Hilbert derivations
// ---------------------------------------------------------------------------

enum class Rule : std::uint8_t {
    axiom,          // A1_i, A2_i, D_i with a substitution
    tautology,      // propositional tautology instance
    modus_ponens,   // from[0]: phi, from[1]: phi -> psi
    necessitation,  // from[0]: phi gives [i]phi
    monotonicity,   // from[0]: phi -> psi gives [i]phi -> [i]psi
};

struct Step {
    Rule rule;
    std::string axiom;  // "A1", "A2", "D", or the tautology schema name
    unsigned index = 0;
    std::map<std::string, Formula> subst;
    std::vector<std::size_t> from;
    Formula formula;
};

struct Theorem {
    Formula formula;
    std::vector<Step> derivation;
};

Formula axiom_schema(const std::string& name, unsigned index);
bool is_tautology(Formula f);
// Empty string when every step follows by its rule; otherwise the complaint.
std::string replay(const Theorem& t, const Logic& logic);

struct TheoremOptions {
    unsigned max_size = 48;
    unsigned max_depth = 4;
};
std::vector<Theorem> gen_theorems(std::uint64_t seed, std::size_t count, const SolverConfig& cfg,
                                  const TheoremOptions& opt = {});
nlohmann::json theorem_to_json(const Theorem& t, bool mono);

// ---------------------------------------------------------------------------
// Formula generators
// ---------------------------------------------------------------------------

struct RandomFormulaSpec {
    std::vector<std::string> atoms{"p", "q"};
    std::vector<unsigned> indices{0};
    unsigned max_depth = 2;
    unsigned max_size = 12;
    bool allow_bottom = true;
};
Formula random_formula(std::uint64_t seed, const RandomFormulaSpec& spec);
// Every core formula of exactly `size` symbols over one atom and one index.
std::vector<Formula> all_formulas(unsigned size, const std::string& atom, unsigned index);

// ---------------------------------------------------------------------------
// Differential harness
// ---------------------------------------------------------------------------

struct DiffRecord {
    std::string formula;
    std::string solver_verdict;
    std::string oracle_verdict;
    std::uint64_t seed = 0;
    bool agree() const { return solver_verdict == oracle_verdict; }
};

enum class Suite : std::uint8_t { k_fragment, theorems, model_truths };

struct DiffItem {
    Formula formula;
    std::uint64_t seed = 0;
    std::optional<unsigned> pi;  // overrides the config's pi
};

std::vector<DiffRecord> differential_run(const std::vector<DiffItem>& corpus, Suite suite,
                                         const SolverConfig& cfg, AuditReport* audit = nullptr);
nlohmann::json to_json(const DiffRecord& r);

// Corpora used by the suites.
std::vector<DiffItem> k_fragment_corpus(std::uint64_t seed, std::size_t random_count,
                                        unsigned pi, unsigned exhaustive_size);
std::vector<DiffItem> theorem_corpus(std::uint64_t seed, std::size_t count, const SolverConfig& cfg);
std::vector<DiffItem> model_truth_corpus(std::uint64_t seed, std::size_t count, unsigned max_pi,
                                         std::size_t max_worlds, unsigned max_depth);

}  // namespace kdesat
