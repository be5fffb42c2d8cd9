#pragma once

// Reference implementations written straight from the definitions, used as
// oracles against the library's optimized paths.

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kdesat/ccs.hpp"
#include "kdesat/formula.hpp"
#include "kdesat/oracle.hpp"
#include "kdesat/window.hpp"

namespace testing {

using namespace kdesat;

inline Logic pi_logic(unsigned pi) { return Logic{pi, Mode::kde_pi}; }
inline Logic mono_logic() { return Logic{1, Mode::kde_mono}; }

inline Formula P(const std::string& text, unsigned pi = 2) { return parse(text, pi_logic(pi)); }
inline Formula M(const std::string& text) { return parse(text, mono_logic()); }

inline FormulaSet S(std::initializer_list<const char*> texts, unsigned pi = 2) {
    FormulaSet s;
    for (const char* t : texts) s.insert(P(t, pi));
    return s;
}

// Closure under the three classical rules, computed naively to a fixpoint.
inline std::vector<Formula> ref_csf(std::vector<Formula> s) {
    for (bool grew = true; grew;) {
        grew = false;
        auto add = [&](Formula f) {
            for (Formula g : s)
                if (g == f) return;
            s.push_back(f);
            grew = true;
        };
        for (std::size_t i = 0; i < s.size(); ++i) {
            Formula f = s[i];
            if (f.kind() == Kind::And) {
                add(f.left());
                add(f.right());
            } else if (f.kind() == Kind::Neg) {
                Formula c = f.child();
                add(c);
                if (c.kind() == Kind::And) {
                    add(Formula::neg(c.left()));
                    add(Formula::neg(c.right()));
                }
            }
        }
    }
    return s;
}

inline bool has(const std::vector<Formula>& s, Formula f) {
    for (Formula g : s)
        if (g == f) return true;
    return false;
}

// The CCS definition, clause by clause.
inline bool ref_is_ccs(const std::vector<Formula>& u, const std::vector<Formula>& seed) {
    for (Formula f : seed)
        if (!has(u, f)) return false;
    auto closure = ref_csf(seed);
    for (Formula f : u) {
        if (!has(closure, f)) return false;
        if (f.kind() == Kind::Bottom) return false;
        if (has(u, Formula::neg(f))) return false;
        if (f.kind() == Kind::And && (!has(u, f.left()) || !has(u, f.right()))) return false;
        if (f.kind() == Kind::Neg) {
            Formula c = f.child();
            if (c.kind() == Kind::And && !has(u, Formula::neg(c.left())) &&
                !has(u, Formula::neg(c.right())))
                return false;
            if (c.kind() == Kind::Neg && !has(u, c.child())) return false;
        }
    }
    return true;
}

// Every CCS of the seed by filtering the powerset of its closure.
inline std::vector<FormulaSet> powerset_ccs(const FormulaSet& seed) {
    std::vector<Formula> base(seed.begin(), seed.end());
    auto closure = ref_csf(base);
    std::vector<FormulaSet> out;
    std::size_t n = closure.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<Formula> u;
        for (std::size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1U) u.push_back(closure[i]);
        if (ref_is_ccs(u, base)) out.push_back(FormulaSet(u));
    }
    return out;
}

inline std::set<std::string> keys(const std::vector<FormulaSet>& sets) {
    std::set<std::string> out;
    for (const auto& s : sets) out.insert(to_string(s));
    return out;
}

inline std::string key(const Window& w) { return to_json(w, false).dump(); }

// Windows for (u, v0) at level k of length d(u), by trying every combination
// of candidate rows (consistent saturated subsets of the subformula universe
// that contain the box projection of u) with every brute-forced subwindow, and
// keeping what is_window accepts.
class BruteWindows {
public:
    BruteWindows(const Logic& logic, FormulaSet universe) : logic_(logic) {
        std::vector<Formula> all(universe.begin(), universe.end());
        if (all.size() > 22) throw std::invalid_argument("universe too large");
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << all.size()); ++mask) {
            FormulaSet s;
            for (std::size_t i = 0; i < all.size(); ++i)
                if ((mask >> i) & 1U) s.insert(all[i]);
            if (is_saturated_consistent(s)) pool_.push_back(s);
        }
    }

    std::size_t pool_size() const { return pool_.size(); }

    const std::vector<Window>& windows(const FormulaSet& u, const FormulaSet& v0, unsigned k) {
        auto id = std::make_tuple(to_string(u), to_string(v0), k);
        auto it = memo_.find(id);
        if (it != memo_.end()) return it->second;
        std::vector<Window> out;
        WindowContext ctx{logic_, u, k, u.depth(), LambdaTag::depth, v0};
        if (is_leaf(logic_, k, u)) {
            if (is_window(Window(), ctx)) out.push_back(Window());
            return memo_[id] = out;
        }
        std::size_t n = u.depth();
        FormulaSet need = box_minus(relation_at(logic_, k), u);
        std::vector<const FormulaSet*> cand;
        for (const auto& s : pool_)
            if (need.is_subset_of(s)) cand.push_back(&s);
        std::vector<FormulaSet> rows(n + 1);
        std::function<void(std::size_t)> pick_rows = [&](std::size_t i) {
            if (i == n + 1) {
                std::vector<std::vector<Window>> opts(n);
                for (std::size_t j = 0; j < n; ++j) {
                    opts[j] = windows(rows[j + 1], rows[j], k + 1);
                    if (opts[j].empty()) return;
                }
                std::vector<Window> subs(n);
                std::function<void(std::size_t)> pick_subs = [&](std::size_t j) {
                    if (j == n) {
                        Window w = Window::node(rows, subs);
                        if (is_window(w, ctx)) out.push_back(w);
                        return;
                    }
                    for (const auto& s : opts[j]) {
                        subs[j] = s;
                        pick_subs(j + 1);
                    }
                };
                pick_subs(0);
                return;
            }
            for (const FormulaSet* s : cand) {
                if (i == 0 && !v0.is_subset_of(*s)) continue;  // a CCS of v0 contains v0
                rows[i] = *s;
                pick_rows(i + 1);
            }
        };
        pick_rows(0);
        return memo_[id] = out;
    }

private:
    Logic logic_;
    std::vector<FormulaSet> pool_;
    std::map<std::tuple<std::string, std::string, unsigned>, std::vector<Window>> memo_;
};

inline Formula random_small(std::mt19937_64& rng, std::vector<unsigned> indices, unsigned depth,
                            unsigned size) {
    RandomFormulaSpec spec;
    spec.atoms = {"p", "q"};
    spec.indices = std::move(indices);
    spec.max_depth = depth;
    spec.max_size = size;
    return random_formula(rng(), spec);
}

// The four CCS split properties on one instance (s, s2) plus a CCS v:
//   1. u in CCS(s + v2), v2 in CCS(s2)  =>  u in CCS(s + s2)
//   2. u in CCS(s + s2)  =>  u = v1 + v2 with v1 in CCS(s), v2 in CCS(s2)
//   3. u in CCS(s2 + v)  =>  u = v + v2 with v2 in CCS(s2)
//   4. u in CCS(s2 + v)  =>  d(u \ v) <= d(s2)
// Bit i-1 is set when property i fails.
inline unsigned ccs_split_violations(const FormulaSet& s, const FormulaSet& s2, const FormulaSet& v) {
    auto vec = [](const FormulaSet& x) { return std::vector<Formula>(x.begin(), x.end()); };
    auto ccs2 = enumerate_ccs(s2);
    auto ccs1 = enumerate_ccs(s);
    unsigned bad = 0;
    // 1: u in CCS(s + v2) with v2 in CCS(s2) is a CCS of s + s2
    for (const auto& v2 : ccs2)
        for (const auto& u : enumerate_ccs(set_union(s, v2)))
            if (!ref_is_ccs(vec(u), vec(set_union(s, s2)))) bad |= 1U;
    // 2: every CCS of s + s2 splits into CCSs of s and of s2
    for (const auto& u : enumerate_ccs(set_union(s, s2))) {
        bool found = false;
        for (const auto& a : ccs1) {
            if (!a.is_subset_of(u)) continue;
            for (const auto& b : ccs2)
                if (set_union(a, b) == u) {
                    found = true;
                    break;
                }
            if (found) break;
        }
        if (!found) bad |= 2U;
    }
    // 3 and 4: u in CCS(s2 + v) with v a CCS
    for (const auto& u : enumerate_ccs(set_union(s2, v))) {
        bool found = false;
        for (const auto& b : ccs2)
            if (set_union(v, b) == u) {
                found = true;
                break;
            }
        if (!found) bad |= 4U;
        if (set_difference(u, v).depth() > s2.depth()) bad |= 8U;
    }
    return bad;
}

// Random instance for the check above with |CSF| of everything at most max_csf.
struct SplitInstance {
    FormulaSet s, s2, v;
};

inline std::optional<SplitInstance> random_split_instance(std::mt19937_64& rng, std::size_t max_csf) {
    auto pick = [&](unsigned n) {
        FormulaSet out;
        for (unsigned i = 0; i < n; ++i) out.insert(random_small(rng, {0, 1}, 2, 6));
        return out;
    };
    SplitInstance in{pick(1 + rng() % 2), pick(1 + rng() % 2), {}};
    auto vs = enumerate_ccs(pick(1 + rng() % 2));
    if (vs.empty()) return std::nullopt;
    in.v = vs[rng() % vs.size()];
    if (csf(set_union(in.s, in.s2)).count() > max_csf) return std::nullopt;
    if (csf(set_union(in.s2, in.v)).count() > max_csf) return std::nullopt;
    return in;
}

}  // namespace testing
