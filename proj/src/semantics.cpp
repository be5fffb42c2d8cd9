#include "kdesat/semantics.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace kdesat {

using nlohmann::json;

// ---------------------------------------------------------------------------
// KripkeModel
// ---------------------------------------------------------------------------

KripkeModel::KripkeModel(std::size_t worlds) {
    for (std::size_t w = 0; w < worlds; ++w) add_world("w" + std::to_string(w));
}

std::size_t KripkeModel::add_world(const std::string& name) {
    for (const auto& n : names_)
        if (n == name) throw std::invalid_argument("duplicate world " + name);
    names_.push_back(name);
    for (auto& rel : succ_) rel.emplace_back();
    for (auto& [a, v] : val_) v.push_back(0);
    return names_.size() - 1;
}

std::size_t KripkeModel::world(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    throw std::out_of_range("unknown world " + name);
}

void KripkeModel::add_edge(unsigned i, std::size_t s, std::size_t t) {
    if (s >= size() || t >= size()) throw std::out_of_range("edge refers to unknown world");
    while (succ_.size() <= i) succ_.emplace_back(size());
    auto& out = succ_[i][s];
    auto it = std::lower_bound(out.begin(), out.end(), t);
    if (it == out.end() || *it != t) out.insert(it, t);
}

bool KripkeModel::has_edge(unsigned i, std::size_t s, std::size_t t) const {
    if (i >= succ_.size()) return false;
    const auto& out = succ_[i][s];
    return std::binary_search(out.begin(), out.end(), t);
}

const std::vector<std::size_t>& KripkeModel::successors(unsigned i, std::size_t s) const {
    static const std::vector<std::size_t> none;
    if (i >= succ_.size()) return none;
    return succ_[i].at(s);
}

void KripkeModel::set_atom(const std::string& atom, std::size_t w, bool value) {
    if (w >= size()) throw std::out_of_range("valuation refers to unknown world");
    auto& v = val_[atom];
    v.resize(size(), 0);
    v[w] = value ? 1 : 0;
}

bool KripkeModel::atom_holds(const std::string& atom, std::size_t w) const {
    auto it = val_.find(atom);
    return it != val_.end() && it->second[w] != 0;
}

json model_to_json(const KripkeModel& m) {
    json worlds = json::array();
    for (std::size_t w = 0; w < m.size(); ++w) worlds.push_back(m.name(w));
    json rels = json::object();
    for (unsigned i = 0; i < m.relation_count(); ++i) {
        json pairs = json::array();
        for (std::size_t s = 0; s < m.size(); ++s)
            for (std::size_t t : m.successors(i, s)) pairs.push_back({m.name(s), m.name(t)});
        rels[std::to_string(i)] = pairs;
    }
    json val = json::object();
    for (const auto& [atom, bits] : m.valuation()) {
        json ws = json::array();
        for (std::size_t w = 0; w < bits.size(); ++w)
            if (bits[w]) ws.push_back(m.name(w));
        val[atom] = ws;
    }
    return {{"worlds", worlds}, {"relations", rels}, {"valuation", val}};
}

KripkeModel model_from_json(const json& j) {
    KripkeModel m;
    for (const auto& w : j.at("worlds")) m.add_world(w.get<std::string>());
    if (j.contains("relations")) {
        for (const auto& [key, pairs] : j.at("relations").items()) {
            std::size_t pos = 0;
            unsigned long i = std::stoul(key, &pos);
            if (pos != key.size()) throw std::invalid_argument("relation key must be a natural");
            for (const auto& p : pairs)
                m.add_edge(static_cast<unsigned>(i), m.world(p.at(0)), m.world(p.at(1)));
        }
    }
    if (j.contains("valuation")) {
        for (const auto& [atom, ws] : j.at("valuation").items()) {
            for (const auto& w : ws) m.set_atom(atom, m.world(w.get<std::string>()));
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Density and satisfaction
// ---------------------------------------------------------------------------

DensityReport is_dense(const KripkeModel& m, unsigned pi, bool mono) {
    DensityReport rep;
    unsigned top = mono ? 1 : pi;
    for (unsigned i = 0; i < top; ++i) {
        unsigned up = mono ? 0 : i + 1;
        for (std::size_t s = 0; s < m.size(); ++s) {
            for (std::size_t t : m.successors(i, s)) {
                bool ok = false;
                for (std::size_t u : m.successors(i, s))
                    if (m.has_edge(up, u, t)) {
                        ok = true;
                        break;
                    }
                if (!ok) rep.violations.push_back({i, s, t});
            }
        }
    }
    return rep;
}

const std::vector<char>& Evaluator::truth(Formula f) {
    auto it = cache_.find(f.id());
    if (it != cache_.end()) return it->second;
    std::vector<char> out(m_.size(), 0);
    switch (f.kind()) {
        case Kind::Atom:
            for (std::size_t w = 0; w < m_.size(); ++w) out[w] = m_.atom_holds(f.name(), w);
            break;
        case Kind::Bottom:
            break;
        case Kind::Neg: {
            const auto& c = truth(f.child());
            for (std::size_t w = 0; w < m_.size(); ++w) out[w] = !c[w];
            break;
        }
        case Kind::And: {
            std::vector<char> a = truth(f.left());
            const auto& b = truth(f.right());
            for (std::size_t w = 0; w < m_.size(); ++w) out[w] = a[w] && b[w];
            break;
        }
        case Kind::Box: {
            const auto& c = truth(f.child());
            unsigned i = mono_ ? 0 : f.index();
            for (std::size_t w = 0; w < m_.size(); ++w) {
                bool all = true;
                for (std::size_t t : m_.successors(i, w)) all = all && c[t];
                out[w] = all;
            }
            break;
        }
    }
    return cache_.emplace(f.id(), std::move(out)).first->second;
}

bool Evaluator::holds(const FormulaSet& s, std::size_t w) {
    for (Formula f : s)
        if (!holds(f, w)) return false;
    return true;
}

bool model_check(const KripkeModel& m, std::size_t x, Formula f, bool mono) {
    if (x >= m.size()) throw std::out_of_range("unknown world");
    Evaluator ev(m, mono);
    return ev.holds(f, x);
}

// ---------------------------------------------------------------------------
// Window satisfaction: each subwindow is anchored at the worlds chosen for
// its parent pair, y_{i+1} as the governing world and y_i as its y_0.
// ---------------------------------------------------------------------------

namespace {

class WindowSat {
public:
    WindowSat(const KripkeModel& m, const Logic& logic) : m_(m), logic_(logic), ev_(m, logic.mono()) {}

    // Rows i.. of w from y (already satisfying v_i), worlds drawn from R_level(x).
    bool chain(std::size_t x, std::size_t y, const Window& w, std::size_t i, unsigned level) {
        if (i == w.length()) return true;
        auto key = std::make_tuple(static_cast<const void*>(&w.rows()), i, x, y);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        memo_[key] = false;
        unsigned r = relation_at(logic_, level);
        unsigned up = relation_at(logic_, level + 1);
        bool ok = false;
        for (std::size_t z : m_.successors(r, x)) {
            if (!m_.has_edge(up, z, y) || !ev_.holds(w.row(i + 1), z)) continue;
            if (!anchored(z, y, w.sub(i), level + 1)) continue;
            if (chain(x, z, w, i + 1, level)) {
                ok = true;
                break;
            }
        }
        memo_[key] = ok;
        return ok;
    }

    bool anchored(std::size_t p, std::size_t y, const Window& w, unsigned level) {
        if (w.is_empty()) return true;
        return chain(p, y, w, 0, level);
    }

    Evaluator& ev() { return ev_; }

private:
    struct KeyHash {
        std::size_t operator()(const std::tuple<const void*, std::size_t, std::size_t, std::size_t>& k) const {
            auto [p, i, x, y] = k;
            return std::hash<const void*>()(p) ^ (i * 1315423911u) ^ (x * 2654435761u) ^ (y * 97);
        }
    };
    const KripkeModel& m_;
    Logic logic_;
    Evaluator ev_;
    std::unordered_map<std::tuple<const void*, std::size_t, std::size_t, std::size_t>, bool, KeyHash>
        memo_;
};

}  // namespace

bool sat_window(const KripkeModel& m, std::size_t x, const Window& w, const WindowContext& ctx) {
    if (x >= m.size()) throw std::out_of_range("unknown world");
    if (w.is_empty()) return true;
    WindowSat ws(m, ctx.logic);
    if (!ws.ev().holds(ctx.u, x)) return false;
    unsigned r = relation_at(ctx.logic, ctx.k);
    for (std::size_t y0 : m.successors(r, x))
        if (ws.ev().holds(w.row(0), y0) && ws.chain(x, y0, w, 0, ctx.k)) return true;
    return false;
}

// ---------------------------------------------------------------------------
// From a model to a window
// ---------------------------------------------------------------------------

namespace {

class WindowBuilder {
public:
    WindowBuilder(const KripkeModel& m, const Logic& logic) : m_(m), logic_(logic), ev_(m, logic.mono()) {}

    struct Body {
        Window w;
        FormulaSet demand;
    };

    // Window body for u (true at p) whose first row lives at y0.
    Body body(std::size_t p, std::size_t y0, const FormulaSet& u, unsigned level, std::size_t n) {
        if (is_leaf(logic_, level, u)) return {Window(), {}};
        unsigned r = relation_at(logic_, level);
        unsigned up = relation_at(logic_, level + 1);
        std::vector<std::size_t> ys{y0};
        std::vector<std::size_t> used;
        for (std::size_t i = 0; i < n; ++i) ys.push_back(witness(p, ys.back(), r, up, used));

        std::vector<FormulaSet> rows(n + 1);
        std::vector<Window> subs(n);
        FormulaSet base = box_minus(r, u);
        if (n == 0) return {Window::node(rows, subs), {}};
        rows[n] = restrict(base, ys[n]);
        for (std::size_t i = n; i-- > 1;) {
            Body b = body(ys[i + 1], ys[i], rows[i + 1], level + 1, rows[i + 1].depth());
            FormulaSet seed = base;
            seed.unite(box_minus(up, rows[i + 1]));
            seed.unite(b.demand);
            rows[i] = restrict(seed, ys[i]);
            subs[i] = b.w.with_first_row(rows[i]);
        }
        Body b0 = body(ys[1], ys[0], rows[1], level + 1, rows[1].depth());
        subs[0] = b0.w;
        FormulaSet demand = box_minus(up, rows[1]);
        demand.unite(b0.demand);
        return {Window::node(rows, subs), demand};
    }

    FormulaSet restrict(const FormulaSet& seed, std::size_t y) {
        std::vector<Formula> out;
        for (Formula f : csf(seed))
            if (ev_.holds(f, y)) out.push_back(f);
        return FormulaSet(std::move(out));
    }

    Evaluator& ev() { return ev_; }

private:
    // A world z with p R z and z R' y, preferring worlds used earlier.
    std::size_t witness(std::size_t p, std::size_t y, unsigned r, unsigned up,
                        std::vector<std::size_t>& used) {
        std::optional<std::size_t> fresh;
        for (std::size_t z : m_.successors(r, p)) {
            if (!m_.has_edge(up, z, y)) continue;
            if (std::find(used.begin(), used.end(), z) != used.end()) return z;
            if (!fresh) fresh = z;
        }
        if (!fresh)
            throw std::runtime_error("density witness missing for (" + m_.name(p) + ", " +
                                     m_.name(y) + "); model is not dense");
        used.push_back(*fresh);
        return *fresh;
    }

    const KripkeModel& m_;
    Logic logic_;
    Evaluator ev_;
};

}  // namespace

Window build_window_from_model(const KripkeModel& m, std::size_t x, std::size_t y0,
                               const FormulaSet& u, const FormulaSet& v0, unsigned k,
                               std::size_t n, const Logic& logic) {
    WindowBuilder b(m, logic);
    if (!m.has_edge(relation_at(logic, k), x, y0))
        throw std::invalid_argument("y0 is not a successor of x");
    if (!b.ev().holds(u, x) || !b.ev().holds(v0, y0))
        throw std::invalid_argument("model does not satisfy the given sets");
    WindowBuilder::Body body = b.body(x, y0, u, k, n);
    if (body.w.is_empty()) return body.w;
    FormulaSet seed = v0;
    seed.unite(box_minus(relation_at(logic, k), u));
    seed.unite(body.demand);
    return body.w.with_first_row(b.restrict(seed, y0));
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

namespace {

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    bool coin(double p) { return static_cast<double>(gen() >> 11) * 0x1.0p-53 < p; }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen() % n); }
};

}  // namespace

KripkeModel gen_dense_model(std::uint64_t seed, unsigned pi, std::size_t size,
                            const std::vector<std::string>& atoms, DenseFamily family, bool mono) {
    if (size == 0) throw std::invalid_argument("model needs at least one world");
    Rng rng(seed);
    KripkeModel m(size);
    unsigned levels = mono ? 1 : pi + 1;
    for (unsigned i = 0; i < levels; ++i) {
        bool reflexive = family == DenseFamily::reflexive && (i > 0 || mono);
        double p = i == 0 ? 0.35 : 0.25;
        for (std::size_t s = 0; s < size; ++s)
            for (std::size_t t = 0; t < size; ++t)
                if ((reflexive && s == t) || rng.coin(p)) m.add_edge(i, s, t);
    }
    if (family == DenseFamily::witnessed) {
        if (mono) {
            // A loop at the target is a witness and is dense itself.
            for (const auto& v : is_dense(m, 0, true).violations) m.add_edge(0, v.t, v.t);
        } else {
            for (unsigned i = 0; i < pi; ++i) {
                for (std::size_t s = 0; s < size; ++s) {
                    for (std::size_t t : std::vector<std::size_t>(m.successors(i, s))) {
                        bool ok = false;
                        for (std::size_t u : m.successors(i, s)) ok = ok || m.has_edge(i + 1, u, t);
                        if (ok) continue;
                        const auto& cands = m.successors(i, s);
                        m.add_edge(i + 1, cands[rng.below(cands.size())], t);
                    }
                }
            }
        }
    }
    for (const auto& a : atoms)
        for (std::size_t w = 0; w < size; ++w) m.set_atom(a, w, rng.coin(0.5));
    if (!is_dense(m, pi, mono).dense()) throw std::logic_error("generated model is not dense");
    return m;
}

// ---------------------------------------------------------------------------
// Bounded model search
// ---------------------------------------------------------------------------

namespace {

struct Compiled {
    struct Op {
        Kind kind;
        int a = -1;
        int b = -1;
        unsigned rel = 0;
        std::size_t atom = 0;
    };
    std::vector<Op> ops;
    std::vector<std::string> atoms;
};

Compiled compile(Formula f, bool mono) {
    Compiled c;
    c.atoms = atoms_of(f);
    std::unordered_map<Formula, int, FormulaHash> index;
    std::function<int(Formula)> go = [&](Formula g) -> int {
        auto it = index.find(g);
        if (it != index.end()) return it->second;
        Compiled::Op op{g.kind()};
        switch (g.kind()) {
            case Kind::Atom:
                op.atom = static_cast<std::size_t>(
                    std::find(c.atoms.begin(), c.atoms.end(), g.name()) - c.atoms.begin());
                break;
            case Kind::Bottom: break;
            case Kind::Neg: op.a = go(g.child()); break;
            case Kind::Box:
                op.a = go(g.child());
                op.rel = mono ? 0 : g.index();
                break;
            case Kind::And:
                op.a = go(g.left());
                op.b = go(g.right());
                break;
        }
        c.ops.push_back(op);
        int id = static_cast<int>(c.ops.size()) - 1;
        index.emplace(g, id);
        return id;
    };
    go(f);
    return c;
}

class Search {
public:
    Search(Formula f, const SearchOptions& opt) : opt_(opt), c_(compile(f, opt.mono)) {
        int m = opt.mono ? 0 : max_index(f);
        rels_ = static_cast<unsigned>(m + 1);
    }

    std::optional<std::pair<KripkeModel, std::size_t>> run() {
        for (std::size_t n = 1; n <= opt_.max_size; ++n) {
            n_ = n;
            full_ = (n == 64) ? ~0ULL : ((1ULL << n) - 1);
            succ_.assign(rels_, std::vector<std::uint64_t>(n, 0));
            truth_.assign(c_.ops.size(), 0);
            if (rels_ == 0 ? valuations() : relations(rels_ - 1)) return build();
        }
        return std::nullopt;
    }

private:
    // Relations are chosen from the top index down so each density check
    // sees the level above already fixed.
    bool relations(unsigned i) {
        std::size_t bits = n_ * n_;
        for (std::uint64_t mask = 0; mask < (1ULL << bits); ++mask) {
            for (std::size_t s = 0; s < n_; ++s) succ_[i][s] = (mask >> (s * n_)) & full_;
            if (opt_.require_dense && !dense(i)) continue;
            if (i == 0 ? valuations() : relations(i - 1)) return true;
        }
        return false;
    }

    bool dense(unsigned i) const {
        bool self = opt_.mono;
        if (!self && (i + 1 >= rels_)) return true;  // level above is the identity
        unsigned up = self ? i : i + 1;
        if (!self && i >= opt_.pi) return true;
        for (std::size_t s = 0; s < n_; ++s) {
            std::uint64_t out = succ_[i][s];
            for (std::size_t t = 0; t < n_; ++t) {
                if (!(out >> t & 1)) continue;
                bool ok = false;
                for (std::size_t u = 0; u < n_ && !ok; ++u)
                    ok = (out >> u & 1) && (succ_[up][u] >> t & 1);
                if (!ok) return false;
            }
        }
        return true;
    }

    bool valuations() {
        std::size_t bits = n_ * c_.atoms.size();
        for (std::uint64_t mask = 0; mask < (1ULL << bits); ++mask) {
            val_ = mask;
            if (eval() & 1) return true;
        }
        return false;
    }

    std::uint64_t eval() {
        for (std::size_t k = 0; k < c_.ops.size(); ++k) {
            const auto& op = c_.ops[k];
            std::uint64_t r = 0;
            switch (op.kind) {
                case Kind::Atom: r = (val_ >> (op.atom * n_)) & full_; break;
                case Kind::Bottom: r = 0; break;
                case Kind::Neg: r = ~truth_[op.a] & full_; break;
                case Kind::And: r = truth_[op.a] & truth_[op.b]; break;
                case Kind::Box:
                    for (std::size_t s = 0; s < n_; ++s)
                        if ((succ_[op.rel][s] & ~truth_[op.a]) == 0) r |= 1ULL << s;
                    break;
            }
            truth_[k] = r;
        }
        return truth_.back();
    }

    std::pair<KripkeModel, std::size_t> build() const {
        KripkeModel m(n_);
        for (unsigned i = 0; i < rels_; ++i)
            for (std::size_t s = 0; s < n_; ++s)
                for (std::size_t t = 0; t < n_; ++t)
                    if (succ_[i][s] >> t & 1) m.add_edge(i, s, t);
        if (opt_.require_dense && !opt_.mono)
            for (unsigned i = rels_; i <= opt_.pi; ++i)
                for (std::size_t s = 0; s < n_; ++s) m.add_edge(i, s, s);
        for (std::size_t a = 0; a < c_.atoms.size(); ++a)
            for (std::size_t w = 0; w < n_; ++w)
                m.set_atom(c_.atoms[a], w, (val_ >> (a * n_ + w)) & 1);
        return {m, 0};
    }

    SearchOptions opt_;
    Compiled c_;
    unsigned rels_ = 0;
    std::size_t n_ = 0;
    std::uint64_t full_ = 0;
    std::vector<std::vector<std::uint64_t>> succ_;
    std::vector<std::uint64_t> truth_;
    std::uint64_t val_ = 0;
};

}  // namespace

std::optional<std::pair<KripkeModel, std::size_t>> bounded_model_search(Formula f,
                                                                        const SearchOptions& opt) {
    if (opt.max_size > 6) throw std::invalid_argument("bounded_model_search: max_size too large");
    return Search(f, opt).run();
}

KripkeModel disjoint_union(const std::vector<KripkeModel>& models) {
    if (models.empty()) throw std::invalid_argument("disjoint_union needs at least one model");
    KripkeModel out;
    std::size_t offset = 0;
    for (std::size_t k = 0; k < models.size(); ++k) {
        const auto& m = models[k];
        for (std::size_t w = 0; w < m.size(); ++w)
            out.add_world("m" + std::to_string(k) + "." + m.name(w));
        for (unsigned i = 0; i < m.relation_count(); ++i)
            for (std::size_t s = 0; s < m.size(); ++s)
                for (std::size_t t : m.successors(i, s)) out.add_edge(i, offset + s, offset + t);
        for (const auto& [atom, bits] : m.valuation())
            for (std::size_t w = 0; w < bits.size(); ++w)
                if (bits[w]) out.set_atom(atom, offset + w);
        offset += m.size();
    }
    return out;
}

}  // namespace kdesat
