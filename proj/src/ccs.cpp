#include "kdesat/ccs.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace kdesat {

FormulaSet box_minus(unsigned i, const FormulaSet& s) {
    std::vector<Formula> out;
    for (Formula f : s)
        if (f.kind() == Kind::Box && f.index() == i) out.push_back(f.child());
    return FormulaSet(std::move(out));
}

bool is_saturated_consistent(const FormulaSet& u) {
    for (Formula f : u) {
        switch (f.kind()) {
            case Kind::Bottom:
                return false;
            case Kind::And:
                if (!u.contains(f.left()) || !u.contains(f.right())) return false;
                break;
            case Kind::Neg: {
                Formula g = f.child();
                if (u.contains(g)) return false;
                if (g.kind() == Kind::Neg && !u.contains(g.child())) return false;
                if (g.kind() == Kind::And && !u.contains(Formula::neg(g.left())) &&
                    !u.contains(Formula::neg(g.right())))
                    return false;
                break;
            }
            default:
                break;
        }
    }
    return true;
}

bool is_ccs(const FormulaSet& u, const FormulaSet& seed) {
    return seed.is_subset_of(u) && u.is_subset_of(csf(seed)) && is_saturated_consistent(u);
}

void sort_ccs_order(std::vector<FormulaSet>& sets) {
    std::vector<char> minimal(sets.size(), 1);
    for (std::size_t i = 0; i < sets.size(); ++i)
        for (std::size_t j = 0; j < sets.size() && minimal[i]; ++j)
            if (i != j && sets[j].count() < sets[i].count() && sets[j].is_subset_of(sets[i]))
                minimal[i] = 0;
    std::vector<std::size_t> idx(sets.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (minimal[a] != minimal[b]) return minimal[a] > minimal[b];
        if (sets[a].count() != sets[b].count()) return sets[a].count() < sets[b].count();
        return compare(sets[a], sets[b]) < 0;
    });
    std::vector<FormulaSet> out;
    out.reserve(sets.size());
    for (std::size_t i : idx) out.push_back(std::move(sets[i]));
    sets = std::move(out);
}

namespace {

// Tableau expansion of `cur` with pending formulas `todo`. `three_way` selects
// the neither-minimal branch (both conjunct negations) at each ~(a & b).
class Expander {
public:
    explicit Expander(bool three_way) : three_way_(three_way) {}

    void run(FormulaSet cur, std::vector<Formula> todo, std::vector<FormulaSet>& out) {
        while (!todo.empty()) {
            Formula f = todo.back();
            todo.pop_back();
            if (f.kind() == Kind::And) {
                if (!add(cur, todo, f.left()) || !add(cur, todo, f.right())) return;
            } else if (f.kind() == Kind::Neg) {
                Formula g = f.child();
                if (g.kind() == Kind::Neg) {
                    if (!add(cur, todo, g.child())) return;
                } else if (g.kind() == Kind::And) {
                    Formula na = Formula::neg(g.left());
                    Formula nb = Formula::neg(g.right());
                    if (cur.contains(na) || cur.contains(nb)) continue;
                    std::vector<std::vector<Formula>> options{{na}, {nb}};
                    if (three_way_) options.push_back({na, nb});
                    for (const auto& opt : options) {
                        FormulaSet c = cur;
                        std::vector<Formula> t = todo;
                        bool ok = true;
                        for (Formula h : opt) ok = ok && add(c, t, h);
                        if (ok) run(std::move(c), std::move(t), out);
                    }
                    return;
                }
            }
        }
        out.push_back(std::move(cur));
    }

    // Adds g to cur, failing on a clash.
    static bool add(FormulaSet& cur, std::vector<Formula>& todo, Formula g) {
        if (cur.contains(g)) return true;
        if (g.kind() == Kind::Bottom) return false;
        if (cur.contains(Formula::neg(g))) return false;
        if (g.kind() == Kind::Neg && cur.contains(g.child())) return false;
        cur.insert(g);
        todo.push_back(g);
        return true;
    }

private:
    bool three_way_;
};

std::vector<FormulaSet> branches(const FormulaSet& seed, bool three_way) {
    FormulaSet cur;
    std::vector<Formula> todo;
    for (Formula f : seed)
        if (!Expander::add(cur, todo, f)) return {};
    std::vector<FormulaSet> out;
    Expander(three_way).run(std::move(cur), std::move(todo), out);
    return out;
}

std::vector<FormulaSet> enumerate_branch(const FormulaSet& seed) {
    FormulaSet closure = csf(seed);
    std::unordered_set<FormulaSet, FormulaSetHash> seen;
    std::vector<FormulaSet> out;
    Expander expander(true);
    const auto& cand = closure.items();

    // Decide each remaining CSF member in order; inclusion re-saturates.
    auto extend = [&](auto& self, std::size_t idx, const FormulaSet& cur) -> void {
        if (idx == cand.size()) {
            if (seen.insert(cur).second) out.push_back(cur);
            return;
        }
        Formula r = cand[idx];
        if (cur.contains(r)) {
            self(self, idx + 1, cur);
            return;
        }
        self(self, idx + 1, cur);
        FormulaSet c = cur;
        std::vector<Formula> todo;
        if (!Expander::add(c, todo, r)) return;
        std::vector<FormulaSet> grown;
        expander.run(std::move(c), std::move(todo), grown);
        for (const auto& g : grown) self(self, idx + 1, g);
    };
    for (const auto& b : branches(seed, true)) extend(extend, 0, b);
    return out;
}

std::vector<FormulaSet> enumerate_exhaustive(const FormulaSet& seed) {
    FormulaSet closure = csf(seed);
    FormulaSet free = set_difference(closure, seed);
    if (free.count() > 24) throw std::length_error("exhaustive CCS enumeration: CSF too large");
    std::vector<FormulaSet> out;
    const auto& items = free.items();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << items.size()); ++mask) {
        std::vector<Formula> members(seed.begin(), seed.end());
        for (std::size_t i = 0; i < items.size(); ++i)
            if (mask >> i & 1) members.push_back(items[i]);
        FormulaSet u(std::move(members));
        if (is_saturated_consistent(u)) out.push_back(std::move(u));
    }
    return out;
}

}  // namespace

std::vector<FormulaSet> enumerate_ccs(const FormulaSet& seed, CcsMode mode) {
    std::vector<FormulaSet> out;
    switch (mode) {
        case CcsMode::branch:
            out = enumerate_branch(seed);
            break;
        case CcsMode::exhaustive:
            out = enumerate_exhaustive(seed);
            break;
        case CcsMode::minimal: {
            std::unordered_set<FormulaSet, FormulaSetHash> seen;
            for (auto& b : branches(seed, false))
                if (seen.insert(b).second) out.push_back(std::move(b));
            sort_ccs_order(out);
            std::vector<FormulaSet> kept;
            for (auto& u : out) {
                bool minimal = true;
                for (const auto& v : kept)
                    if (v.is_subset_of(u)) minimal = false;
                if (minimal) kept.push_back(std::move(u));
            }
            return kept;
        }
    }
    sort_ccs_order(out);
    return out;
}

}  // namespace kdesat
