#pragma once

#include <vector>

#include "kdesat/formula.hpp"

namespace kdesat {

enum class CcsMode : std::uint8_t {
    branch,      // tableau branches, then optional inclusion of the rest of CSF
    exhaustive,  // powerset filter
    minimal,     // only subset-minimal saturations (experimental)
};

FormulaSet box_minus(unsigned i, const FormulaSet& s);

// Consistent and saturated, without reference to a seed.
bool is_saturated_consistent(const FormulaSet& u);
bool is_ccs(const FormulaSet& u, const FormulaSet& seed);

// Every CCS of the seed, minimal ones first, then by cardinality, then by the
// structural order of the member lists. Empty result: classically inconsistent.
std::vector<FormulaSet> enumerate_ccs(const FormulaSet& seed, CcsMode mode = CcsMode::branch);

inline std::vector<FormulaSet> ccs_satisfiable_reduction(const FormulaSet& s,
                                                         CcsMode mode = CcsMode::branch) {
    return enumerate_ccs(s, mode);
}

// Orders a list of sets the way enumerate_ccs does.
void sort_ccs_order(std::vector<FormulaSet>& sets);

}  // namespace kdesat
