#include "kdesat/oracle.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "kdesat/semantics.hpp"

namespace kdesat {

// ---------------------------------------------------------------------------
// K tableau. Terms are numbered nodes keyed by their printed form, so nothing
// from the interner or the structural order is reused.
// ---------------------------------------------------------------------------

namespace {

class KTableau {
public:
    int from(Formula f) {
        switch (f.kind()) {
            case Kind::Atom: return make('v', -1, -1, f.name());
            case Kind::Bottom: return make('0', -1, -1, "");
            case Kind::Neg: return make('~', from(f.child()), -1, "");
            case Kind::And: return make('&', from(f.left()), from(f.right()), "");
            case Kind::Box: return make('#', from(f.child()), -1, "");
        }
        return -1;
    }

    bool sat(std::set<int> s) { return expand(std::move(s)); }

private:
    struct T {
        char op;
        int a, b;
        std::string key;
    };

    int make(char op, int a, int b, const std::string& name) {
        std::string key;
        switch (op) {
            case 'v': key = name; break;
            case '0': key = "F"; break;
            case '~': key = "~" + ts_[a].key; break;
            case '#': key = "#" + ts_[a].key; break;
            default: key = "(" + ts_[a].key + "&" + ts_[b].key + ")";
        }
        auto it = ids_.find(key);
        if (it != ids_.end()) return it->second;
        ts_.push_back({op, a, b, key});
        int id = static_cast<int>(ts_.size()) - 1;
        ids_.emplace(key, id);
        return id;
    }
    int negate(int x) { return make('~', x, -1, ""); }

    bool expand(std::set<int> s) {
        for (;;) {
            bool changed = false;
            for (int x : s) {
                const T& t = ts_[x];
                if (t.op == '0') return false;
                if (s.count(negate(x))) return false;
                if (t.op == '&') {
                    if (!s.count(t.a) || !s.count(t.b)) {
                        s.insert(t.a);
                        s.insert(t.b);
                        changed = true;
                        break;
                    }
                } else if (t.op == '~') {
                    const T& c = ts_[t.a];
                    if (c.op == '~' && !s.count(c.a)) {
                        s.insert(c.a);
                        changed = true;
                        break;
                    }
                }
            }
            if (!changed) break;
        }
        // Branch on the first unresolved ~(a & b).
        for (int x : s) {
            const T& t = ts_[x];
            if (t.op != '~' || ts_[t.a].op != '&') continue;
            int na = negate(ts_[t.a].a), nb = negate(ts_[t.a].b);
            if (s.count(na) || s.count(nb)) continue;
            auto left = s;
            left.insert(na);
            if (expand(std::move(left))) return true;
            s.insert(nb);
            return expand(std::move(s));
        }
        auto m = memo_.find(s);
        if (m != memo_.end()) return m->second;
        std::set<int> boxed;
        for (int x : s)
            if (ts_[x].op == '#') boxed.insert(ts_[x].a);
        bool ok = true;
        for (int x : s) {
            const T& t = ts_[x];
            if (t.op != '~' || ts_[t.a].op != '#') continue;
            auto succ = boxed;
            succ.insert(negate(ts_[t.a].a));
            if (!expand(std::move(succ))) {
                ok = false;
                break;
            }
        }
        memo_.emplace(std::move(s), ok);
        return ok;
    }

    std::deque<T> ts_;  // stable references while terms are added
    std::unordered_map<std::string, int> ids_;
    std::map<std::set<int>, bool> memo_;
};

void collect_indices(Formula f, std::set<unsigned>& out) {
    switch (f.kind()) {
        case Kind::Box: out.insert(f.index()); [[fallthrough]];
        case Kind::Neg: collect_indices(f.child(), out); break;
        case Kind::And:
            collect_indices(f.left(), out);
            collect_indices(f.right(), out);
            break;
        default: break;
    }
}

}  // namespace

bool k_sat(Formula f) {
    std::set<unsigned> idx;
    collect_indices(f, idx);
    if (idx.size() > 1) throw std::invalid_argument("k_sat: more than one modality index");
    KTableau t;
    return t.sat({t.from(f)});
}

// ---------------------------------------------------------------------------
// Derivations
// ---------------------------------------------------------------------------

namespace {

using Subst = std::map<std::string, Formula>;

Formula substitute(Formula f, const Subst& s) {
    switch (f.kind()) {
        case Kind::Atom: {
            auto it = s.find(f.name());
            return it == s.end() ? f : it->second;
        }
        case Kind::Bottom: return f;
        case Kind::Neg: return Formula::neg(substitute(f.child(), s));
        case Kind::Box: return Formula::box(f.index(), substitute(f.child(), s));
        case Kind::And: return Formula::conj(substitute(f.left(), s), substitute(f.right(), s));
    }
    return f;
}

std::optional<std::pair<Formula, Formula>> as_implication(Formula f) {
    if (!f.is_neg() || f.child().kind() != Kind::And || !f.child().right().is_neg())
        return std::nullopt;
    return std::make_pair(f.child().left(), f.child().right().child());
}

Formula A() { return Formula::atom("A"); }
Formula B() { return Formula::atom("B"); }
Formula C() { return Formula::atom("C"); }
Formula imp(Formula a, Formula b) { return Formula::implies(a, b); }

const std::vector<std::pair<std::string, Formula>>& tautology_schemas() {
    static const std::vector<std::pair<std::string, Formula>> t = {
        {"id", imp(A(), A())},
        {"weaken", imp(A(), imp(B(), A()))},
        {"distrib", imp(imp(A(), imp(B(), C())), imp(imp(A(), B()), imp(A(), C())))},
        {"and-l", imp(Formula::conj(A(), B()), A())},
        {"and-r", imp(Formula::conj(A(), B()), B())},
        {"and-i", imp(A(), imp(B(), Formula::conj(A(), B())))},
        {"dneg", imp(Formula::neg(Formula::neg(A())), A())},
        {"contra", imp(imp(A(), B()), imp(Formula::neg(B()), Formula::neg(A())))},
        {"lem", Formula::disj(A(), Formula::neg(A()))},
        {"syll", imp(imp(A(), B()), imp(imp(B(), C()), imp(A(), C())))},
    };
    return t;
}

void skeleton(Formula f, std::vector<Formula>& vars) {
    switch (f.kind()) {
        case Kind::Atom:
        case Kind::Box:
            if (std::find(vars.begin(), vars.end(), f) == vars.end()) vars.push_back(f);
            break;
        case Kind::Bottom: break;
        case Kind::Neg: skeleton(f.child(), vars); break;
        case Kind::And:
            skeleton(f.left(), vars);
            skeleton(f.right(), vars);
            break;
    }
}

bool eval_skeleton(Formula f, const std::vector<Formula>& vars, std::uint64_t bits) {
    switch (f.kind()) {
        case Kind::Atom:
        case Kind::Box: {
            auto i = std::find(vars.begin(), vars.end(), f) - vars.begin();
            return (bits >> i) & 1U;
        }
        case Kind::Bottom: return false;
        case Kind::Neg: return !eval_skeleton(f.child(), vars, bits);
        case Kind::And:
            return eval_skeleton(f.left(), vars, bits) && eval_skeleton(f.right(), vars, bits);
    }
    return false;
}

}  // namespace

Formula axiom_schema(const std::string& name, unsigned index) {
    Formula p = Formula::atom("p"), q = Formula::atom("q");
    if (name == "A1") return Formula::box(index, Formula::top());
    if (name == "A2")
        return imp(Formula::conj(Formula::box(index, p), Formula::box(index, q)),
                   Formula::box(index, Formula::conj(p, q)));
    if (name == "D") return imp(Formula::box(index, Formula::box(index + 1, p)), Formula::box(index, p));
    if (name == "Dmono") return imp(Formula::box(0, Formula::box(0, p)), Formula::box(0, p));
    for (const auto& [n, f] : tautology_schemas())
        if (n == name) return f;
    throw std::invalid_argument("unknown schema " + name);
}

bool is_tautology(Formula f) {
    std::vector<Formula> vars;
    skeleton(f, vars);
    if (vars.size() > 20) throw std::invalid_argument("is_tautology: too many variables");
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << vars.size()); ++b)
        if (!eval_skeleton(f, vars, b)) return false;
    return true;
}

std::string replay(const Theorem& t, const Logic& logic) {
    const auto& d = t.derivation;
    auto fail = [](std::size_t i, const std::string& why) {
        return "step " + std::to_string(i) + ": " + why;
    };
    for (std::size_t i = 0; i < d.size(); ++i) {
        const Step& s = d[i];
        for (auto j : s.from)
            if (j >= i) return fail(i, "refers forward");
        auto idx_ok = [&](unsigned k) { return logic.mono() ? k == 0 : k <= logic.pi; };
        switch (s.rule) {
            case Rule::axiom: {
                if (s.axiom == "D" && (logic.mono() || s.index >= logic.pi))
                    return fail(i, "density index out of range");
                if (s.axiom == "Dmono" && !logic.mono()) return fail(i, "mono density outside mono mode");
                if (!idx_ok(s.index)) return fail(i, "index out of range");
                if (s.axiom != "A1" && s.axiom != "A2" && s.axiom != "D" && s.axiom != "Dmono")
                    return fail(i, "unknown axiom " + s.axiom);
                if (substitute(axiom_schema(s.axiom, s.index), s.subst) != s.formula)
                    return fail(i, "not an instance of " + s.axiom);
                break;
            }
            case Rule::tautology:
                if (substitute(axiom_schema(s.axiom, 0), s.subst) != s.formula)
                    return fail(i, "not an instance of " + s.axiom);
                if (!is_tautology(s.formula)) return fail(i, "not a tautology");
                break;
            case Rule::modus_ponens: {
                if (s.from.size() != 2) return fail(i, "modus ponens needs two premises");
                auto im = as_implication(d[s.from[1]].formula);
                if (!im || im->first != d[s.from[0]].formula || im->second != s.formula)
                    return fail(i, "modus ponens does not match");
                break;
            }
            case Rule::necessitation:
                if (s.from.size() != 1 || !idx_ok(s.index) ||
                    s.formula != Formula::box(s.index, d[s.from[0]].formula))
                    return fail(i, "necessitation does not match");
                break;
            case Rule::monotonicity: {
                if (s.from.size() != 1 || !idx_ok(s.index)) return fail(i, "bad monotonicity");
                auto im = as_implication(d[s.from[0]].formula);
                if (!im || s.formula != imp(Formula::box(s.index, im->first),
                                            Formula::box(s.index, im->second)))
                    return fail(i, "monotonicity does not match");
                break;
            }
        }
    }
    if (d.empty() || d.back().formula != t.formula) return "derivation does not end in the theorem";
    return {};
}

namespace {

class Deriver {
public:
    Deriver(std::mt19937_64& rng, const Logic& logic) : rng_(rng), logic_(logic) {}

    std::vector<Step> steps;

    unsigned pick(unsigned n) { return static_cast<unsigned>(rng_() % n); }
    bool coin() { return (rng_() & 1U) != 0; }
    unsigned box_index() { return logic_.mono() ? 0 : pick(logic_.pi + 1); }
    bool has_density() const { return logic_.mono() || logic_.pi > 0; }

    Formula small(unsigned depth) {
        static const char* names[] = {"p", "q", "r"};
        unsigned c = depth == 0 ? pick(4) : pick(8);
        if (c < 3) return Formula::atom(names[c]);
        if (c == 3) return pick(4) == 0 ? Formula::top() : Formula::atom(names[pick(3)]);
        if (c == 4) return Formula::neg(small(depth - 1));
        if (c == 5) return Formula::conj(small(depth - 1), small(depth - 1));
        return Formula::box(box_index(), small(depth - 1));
    }

    std::size_t push(Step s) {
        steps.push_back(std::move(s));
        return steps.size() - 1;
    }
    const Formula& at(std::size_t i) const { return steps[i].formula; }

    std::size_t axiom(const std::string& name, unsigned index, Subst sub) {
        Formula f = substitute(axiom_schema(name, index), sub);
        return push({Rule::axiom, name, index, std::move(sub), {}, f});
    }
    std::size_t taut(const std::string& name, Formula a, Formula b = Formula::top(),
                     Formula c = Formula::top()) {
        Subst sub{{"A", a}, {"B", b}, {"C", c}};
        Formula f = substitute(axiom_schema(name, 0), sub);
        return push({Rule::tautology, name, 0, std::move(sub), {}, f});
    }
    std::size_t mp(std::size_t i, std::size_t j) {
        auto im = as_implication(at(j));
        if (!im || im->first != at(i)) throw std::logic_error("mp mismatch");
        return push({Rule::modus_ponens, "", 0, {}, {i, j}, im->second});
    }
    std::size_t nec(std::size_t i, unsigned k) {
        return push({Rule::necessitation, "", k, {}, {i}, Formula::box(k, at(i))});
    }
    std::size_t mono(std::size_t i, unsigned k) {
        auto im = as_implication(at(i));
        return push({Rule::monotonicity, "", k, {}, {i},
                     imp(Formula::box(k, im->first), Formula::box(k, im->second))});
    }

    std::size_t density(Formula p) {
        if (logic_.mono()) return axiom("Dmono", 0, {{"p", p}});
        return axiom("D", pick(logic_.pi), {{"p", p}});
    }
    // From X -> Y and Y -> Z derive X -> Z.
    std::size_t chain(std::size_t i, std::size_t j) {
        auto a = as_implication(at(i)), b = as_implication(at(j));
        std::size_t s = taut("syll", a->first, a->second, b->second);
        return mp(j, mp(i, s));
    }
    // From X and Y derive X & Y.
    std::size_t pair(std::size_t i, std::size_t j) {
        std::size_t s = taut("and-i", at(i), at(j));
        return mp(j, mp(i, s));
    }

    // A theorem ending at the last step.
    std::size_t theorem() {
        unsigned c = pick(10);
        if (!has_density()) c = 6 + pick(4);
        switch (c) {
            case 0:
            case 1:
            case 2: {  // density under nested substitution, sometimes boxed
                std::size_t d = density(small(2));
                if (pick(3) == 0) d = nec(d, box_index());
                return d;
            }
            case 3: {  // contraposed density: diamond form
                std::size_t d = density(Formula::neg(small(1)));
                auto im = as_implication(at(d));
                return mp(d, taut("contra", im->first, im->second));
            }
            case 4: {  // density composed with monotonicity on a conjunction
                Formula a = small(1), b = small(1);
                std::size_t d = density(Formula::conj(a, b));
                unsigned k = steps[d].index;
                std::size_t m = mono(taut("and-l", a, b), k);
                return chain(d, m);
            }
            case 5: {  // density instance combined with a second theorem
                std::size_t d = density(small(1));
                std::size_t e = pick(2) == 0 ? axiom("A1", box_index(), {}) : density(small(1));
                return pair(d, e);
            }
            case 6: {  // MP chain on A2
                unsigned k = box_index();
                Formula a = small(1), b = small(1);
                std::size_t ta = nec(taut("id", a), k);
                std::size_t tb = nec(taut(coin() ? "lem" : "dneg", b), k);
                std::size_t both = pair(ta, tb);
                std::size_t a2 = axiom("A2", k, {{"p", at(ta).child()}, {"q", at(tb).child()}});
                return mp(both, a2);
            }
            case 7: {  // necessitation of a tautology
                std::size_t t = taut(tautology_schemas()[pick(10)].first, small(1), small(1), small(0));
                return nec(t, box_index());
            }
            case 8: {  // A1 under necessitation
                std::size_t a = axiom("A1", box_index(), {});
                if (coin()) a = nec(a, box_index());
                return a;
            }
            default: {  // monotonicity over a tautological implication
                std::size_t t = taut(coin() ? "and-r" : "weaken", small(1), small(1));
                return mono(t, box_index());
            }
        }
    }

private:
    std::mt19937_64& rng_;
    const Logic& logic_;
};

}  // namespace

std::vector<Theorem> gen_theorems(std::uint64_t seed, std::size_t count, const SolverConfig& cfg,
                                  const TheoremOptions& opt) {
    std::mt19937_64 rng(seed);
    std::vector<Theorem> out;
    while (out.size() < count) {
        Deriver d(rng, cfg.logic);
        std::size_t last = d.theorem();
        Formula f = d.at(last);
        if (f.size() > opt.max_size || f.depth() > opt.max_depth) continue;
        out.push_back({f, std::move(d.steps)});
    }
    return out;
}

nlohmann::json theorem_to_json(const Theorem& t, bool mono) {
    static const char* rules[] = {"axiom", "tautology", "mp", "nec", "mono"};
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : t.derivation) {
        nlohmann::json j{{"rule", rules[static_cast<int>(s.rule)]},
                         {"formula", to_string(s.formula, mono)}};
        if (!s.axiom.empty()) j["schema"] = s.axiom;
        if (s.rule == Rule::axiom || s.rule == Rule::necessitation || s.rule == Rule::monotonicity)
            j["index"] = s.index;
        if (!s.subst.empty()) {
            nlohmann::json sub = nlohmann::json::object();
            for (const auto& [k, v] : s.subst) sub[k] = to_string(v, mono);
            j["subst"] = sub;
        }
        if (!s.from.empty()) j["from"] = s.from;
        steps.push_back(std::move(j));
    }
    return {{"formula", to_string(t.formula, mono)}, {"derivation", steps}};
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

namespace {

Formula grow(std::mt19937_64& rng, const RandomFormulaSpec& spec, unsigned depth, unsigned budget) {
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    if (budget <= 1 || pick(4) == 0) {
        if (spec.allow_bottom && pick(8) == 0) return Formula::bottom();
        return Formula::atom(spec.atoms[pick(spec.atoms.size())]);
    }
    unsigned c = static_cast<unsigned>(pick(depth > 0 ? 3 : 2));
    if (c == 0) return Formula::neg(grow(rng, spec, depth, budget - 1));
    if (c == 1 && budget >= 3) {
        unsigned l = 1 + static_cast<unsigned>(pick(budget - 2));
        Formula a = grow(rng, spec, depth, l);
        return Formula::conj(a, grow(rng, spec, depth, budget - 1 - a.size()));
    }
    if (c == 2) {
        unsigned k = spec.indices[pick(spec.indices.size())];
        if (budget >= 4 && pick(2) == 0)
            return Formula::diamond(k, grow(rng, spec, depth - 1, budget - 3));
        return Formula::box(k, grow(rng, spec, depth - 1, budget - 1));
    }
    return Formula::neg(grow(rng, spec, depth, budget - 1));
}

}  // namespace

Formula random_formula(std::uint64_t seed, const RandomFormulaSpec& spec) {
    std::mt19937_64 rng(seed);
    return grow(rng, spec, spec.max_depth, spec.max_size);
}

std::vector<Formula> all_formulas(unsigned size, const std::string& atom, unsigned index) {
    std::vector<std::vector<Formula>> by(size + 1);
    for (unsigned n = 1; n <= size; ++n) {
        if (n == 1) {
            by[1] = {Formula::atom(atom), Formula::bottom()};
            continue;
        }
        for (Formula f : by[n - 1]) {
            by[n].push_back(Formula::neg(f));
            by[n].push_back(Formula::box(index, f));
        }
        for (unsigned l = 1; l + 1 < n; ++l)
            for (Formula a : by[l])
                for (Formula b : by[n - 1 - l]) by[n].push_back(Formula::conj(a, b));
    }
    return size == 0 ? std::vector<Formula>{} : by[size];
}

// ---------------------------------------------------------------------------
// Differential harness
// ---------------------------------------------------------------------------

std::vector<DiffRecord> differential_run(const std::vector<DiffItem>& corpus, Suite suite,
                                         const SolverConfig& cfg, AuditReport* audit) {
    std::vector<DiffRecord> out;
    out.reserve(corpus.size());
    for (const auto& item : corpus) {
        SolverConfig c = cfg;
        if (item.pi) c.logic.pi = *item.pi;
        DiffRecord r;
        r.formula = to_string(item.formula, c.logic.mono());
        r.seed = item.seed;
        switch (suite) {
            case Suite::k_fragment: r.oracle_verdict = k_sat(item.formula) ? "sat" : "unsat"; break;
            case Suite::theorems: r.oracle_verdict = "unsat"; break;
            case Suite::model_truths: r.oracle_verdict = "sat"; break;
        }
        try {
            Verdict v = solve_sat(item.formula, c);
            r.solver_verdict = to_string(v.result);
            if (audit) audit->absorb(v.audit);
        } catch (const BudgetExhausted&) {
            r.solver_verdict = "budget";
        }
        out.push_back(std::move(r));
    }
    return out;
}

nlohmann::json to_json(const DiffRecord& r) {
    return {{"formula", r.formula},
            {"solver_verdict", r.solver_verdict},
            {"oracle_verdict", r.oracle_verdict},
            {"seed", r.seed}};
}

std::vector<DiffItem> k_fragment_corpus(std::uint64_t seed, std::size_t random_count, unsigned pi,
                                        unsigned exhaustive_size) {
    std::vector<DiffItem> out;
    std::vector<unsigned> idx{0};
    if (pi > 0) idx.push_back(pi);
    for (unsigned k : idx)
        for (unsigned n = 1; n <= exhaustive_size; ++n)
            for (Formula f : all_formulas(n, "p", k)) out.push_back({f, 0, pi});
    RandomFormulaSpec spec;
    spec.atoms = {"p", "q", "r"};
    spec.indices = {pi};
    spec.max_depth = 3;
    spec.max_size = 14;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < random_count; ++i) {
        std::uint64_t s = rng();
        out.push_back({random_formula(s, spec), s, pi});
    }
    return out;
}

std::vector<DiffItem> theorem_corpus(std::uint64_t seed, std::size_t count, const SolverConfig& cfg) {
    std::vector<DiffItem> out;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t s = rng();
        Theorem t = gen_theorems(s, 1, cfg).front();
        out.push_back({Formula::neg(t.formula), s, cfg.logic.pi});
    }
    return out;
}

std::vector<DiffItem> model_truth_corpus(std::uint64_t seed, std::size_t count, unsigned max_pi,
                                         std::size_t max_worlds, unsigned max_depth) {
    std::vector<DiffItem> out;
    std::mt19937_64 rng(seed);
    while (out.size() < count) {
        std::uint64_t s = rng();
        unsigned pi = static_cast<unsigned>(s % (max_pi + 1));
        std::size_t n = 1 + static_cast<std::size_t>((s >> 8) % max_worlds);
        DenseFamily fam = ((s >> 16) & 1U) ? DenseFamily::witnessed : DenseFamily::reflexive;
        KripkeModel m = gen_dense_model(s, pi, n, {"p", "q"}, fam);
        std::size_t x = static_cast<std::size_t>((s >> 24) % n);
        RandomFormulaSpec spec;
        spec.atoms = {"p", "q"};
        spec.indices.clear();
        for (unsigned k = 0; k <= pi; ++k) spec.indices.push_back(k);
        spec.max_depth = max_depth;
        spec.max_size = 12;
        Formula f = random_formula(s ^ 0x9e3779b97f4a7c15ULL, spec);
        if (!model_check(m, x, f)) f = Formula::neg(f);
        out.push_back({f, s, pi});
    }
    return out;
}

}  // namespace kdesat
