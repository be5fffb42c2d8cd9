#include "kdesat/window.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace kdesat {

namespace {

const std::vector<FormulaSet> kNoRows;
const std::vector<Window> kNoSubs;

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

}  // namespace

Window Window::node(std::vector<FormulaSet> rows, std::vector<Window> subs) {
    if (rows.empty()) throw std::invalid_argument("window node needs at least one row");
    if (subs.size() + 1 != rows.size())
        throw std::invalid_argument("window node needs one subwindow per row gap");
    std::size_t h = 0xabcdef;
    for (const auto& r : rows) h = mix(h, r.hash());
    for (const auto& s : subs) h = mix(h, s.hash());
    Window w;
    w.rep_ = std::make_shared<const Rep>(Rep{std::move(rows), std::move(subs), h});
    return w;
}

std::size_t Window::length() const { return rep_ ? rep_->rows.size() - 1 : 0; }
const std::vector<FormulaSet>& Window::rows() const { return rep_ ? rep_->rows : kNoRows; }
const std::vector<Window>& Window::subs() const { return rep_ ? rep_->subs : kNoSubs; }
std::size_t Window::hash() const { return rep_ ? rep_->hash : 0x77; }

bool operator==(const Window& a, const Window& b) {
    if (a.rep_ == b.rep_) return true;
    if (!a.rep_ || !b.rep_) return false;
    if (a.rep_->hash != b.rep_->hash) return false;
    return a.rep_->rows == b.rep_->rows && a.rep_->subs == b.rep_->subs;
}

Window Window::with_first_row(const FormulaSet& v0) const {
    if (!rep_) return *this;
    std::vector<FormulaSet> rows = rep_->rows;
    std::vector<Window> subs = rep_->subs;
    rows[0] = v0;
    if (!subs.empty()) subs[0] = subs[0].with_first_row(v0);
    return node(std::move(rows), std::move(subs));
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

unsigned relation_at(const Logic& logic, unsigned level) { return logic.mono() ? 0 : level; }

bool is_leaf(const Logic& logic, unsigned level, const FormulaSet& u) {
    return logic.mono() ? u.depth() <= 1 : level >= logic.pi;
}

FormulaSet first_row_demand(const Window& w, unsigned level, const Logic& logic) {
    if (w.is_empty() || w.length() == 0) return {};
    FormulaSet d = box_minus(relation_at(logic, level + 1), w.row(1));
    d.unite(first_row_demand(w.sub(0), level + 1, logic));
    return d;
}

FormulaSet row_seed(const Window& w, std::size_t i, unsigned level, const FormulaSet& u,
                    const Logic& logic) {
    FormulaSet s = box_minus(relation_at(logic, level), u);
    if (i < w.length()) {
        s.unite(box_minus(relation_at(logic, level + 1), w.row(i + 1)));
        s.unite(first_row_demand(w.sub(i), level + 1, logic));
    }
    return s;
}

bool is_window(const Window& w, const WindowContext& ctx) {
    const Logic& logic = ctx.logic;
    if (is_leaf(logic, ctx.k, ctx.u)) return w.is_empty();
    if (w.is_empty()) return false;
    if (w.length() != ctx.n) return false;
    if (ctx.lambda_tag == LambdaTag::depth && ctx.n < ctx.u.depth()) return false;
    for (std::size_t i = 0; i <= ctx.n; ++i) {
        FormulaSet seed = row_seed(w, i, ctx.k, ctx.u, logic);
        if (i == 0) {
            if (ctx.v0_seed) {
                seed.unite(*ctx.v0_seed);
                if (!is_ccs(w.row(0), seed)) return false;
            } else if (!seed.is_subset_of(w.row(0)) || !is_saturated_consistent(w.row(0))) {
                return false;
            }
        } else if (!is_ccs(w.row(i), seed)) {
            return false;
        }
    }
    for (std::size_t i = 0; i < ctx.n; ++i) {
        const FormulaSet& up = w.row(i + 1);
        WindowContext sub{logic, up, ctx.k + 1, up.depth(), LambdaTag::depth, w.row(i)};
        if (!is_window(w.sub(i), sub)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Members and slices
// ---------------------------------------------------------------------------

namespace {

void collect(const Window& w, std::vector<FormulaSet>& out) {
    for (const auto& r : w.rows()) out.push_back(r);
    for (const auto& s : w.subs()) collect(s, out);
}

}  // namespace

std::vector<FormulaSet> members(const Window& w) {
    std::vector<FormulaSet> all;
    collect(w, all);
    std::sort(all.begin(), all.end(),
              [](const FormulaSet& a, const FormulaSet& b) { return compare(a, b) < 0; });
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

std::size_t member_count(const Window& w) {
    std::size_t c = w.rows().size();
    for (const auto& s : w.subs()) c += member_count(s);
    return c;
}

WindowSlice partial(const Window& w, std::size_t a, std::size_t b) {
    if (w.is_empty() || a > b || b > w.length())
        throw std::out_of_range("partial window index out of range");
    return WindowSlice{w, a, b};
}

// ---------------------------------------------------------------------------
// Pointwise inclusion
// ---------------------------------------------------------------------------

namespace {

bool included(const Window& w1, std::size_t a1, const Window& w2, std::size_t a2,
              std::size_t width, unsigned level, const FormulaSet& u2, const Logic& logic,
              bool nested) {
    for (std::size_t j = 0; j <= width; ++j) {
        const FormulaSet& x = w1.row(a1 + j);
        const FormulaSet& y = w2.row(a2 + j);
        if (nested && j == 0) {
            if (!x.is_subset_of(y)) return false;
            continue;
        }
        FormulaSet seed = row_seed(w2, a2 + j, level, u2, logic);
        seed.unite(x);
        if (!is_ccs(y, seed)) return false;
    }
    for (std::size_t j = 0; j < width; ++j) {
        const Window& s1 = w1.sub(a1 + j);
        const Window& s2 = w2.sub(a2 + j);
        if (s1.is_empty()) continue;
        // The refined side governs a superset, so its subwindow may be longer.
        if (s2.is_empty() || s2.length() < s1.length()) return false;
        if (!included(s1, 0, s2, 0, s1.length(), level + 1, w2.row(a2 + j + 1), logic, true))
            return false;
    }
    return true;
}

}  // namespace

bool pointwise_included(const WindowSlice& s1, const WindowSlice& s2, unsigned k,
                        const FormulaSet& u2, const Logic& logic) {
    if (s1.window.is_empty() && s2.window.is_empty()) return true;
    if (s1.window.is_empty() || s2.window.is_empty())
        throw std::invalid_argument("pointwise inclusion: level mismatch");
    if (s1.width() != s2.width())
        throw std::invalid_argument("pointwise inclusion: slice width mismatch");
    return included(s1.window, s1.a, s2.window, s2.a, s1.width(), k, u2, logic, false);
}

// ---------------------------------------------------------------------------
// Continuations
// ---------------------------------------------------------------------------

namespace {

void require_chain_shape(const Window& w1, const Window& w2, const WindowContext& ctx) {
    if (ctx.u.depth() < 1 || is_leaf(ctx.logic, ctx.k, ctx.u))
        throw std::invalid_argument("continuation needs d(u) >= 1 below the leaf level");
    if (w1.is_empty() || w2.is_empty())
        throw std::invalid_argument("continuation of an empty window");
    if (w2.length() != ctx.n || w1.length() < ctx.n)
        throw std::invalid_argument("continuation: window length mismatch");
}

}  // namespace

bool is_continuation(const Window& w2, const Window& w1, const WindowContext& ctx) {
    require_chain_shape(w1, w2, ctx);
    if (w1.length() != ctx.n) throw std::invalid_argument("continuation: window length mismatch");
    WindowContext c2 = ctx;
    c2.v0_seed.reset();
    if (!is_window(w1, ctx) || !is_window(w2, c2))
        throw std::invalid_argument("continuation: argument is not a window");
    std::size_t n = ctx.n;
    return pointwise_included(partial(w1, 1, n), partial(w2, 0, n - 1), ctx.k, ctx.u, ctx.logic);
}

Window extend_window(const Window& l, const Window& w2, const WindowContext& ctx) {
    require_chain_shape(l, w2, ctx);
    std::size_t n = ctx.n;
    std::size_t m = l.length();
    if (!pointwise_included(partial(l, m - n + 1, m), partial(w2, 0, n - 1), ctx.k, ctx.u,
                            ctx.logic))
        throw std::invalid_argument("extend: not a continuation");
    std::vector<FormulaSet> rows(l.rows().begin(), l.rows().begin() + (m - n + 1));
    std::vector<Window> subs(l.subs().begin(), l.subs().begin() + (m - n + 1));
    rows.insert(rows.end(), w2.rows().begin(), w2.rows().end());
    subs.insert(subs.end(), w2.subs().begin(), w2.subs().end());
    return Window::node(std::move(rows), std::move(subs));
}

Window merge_continuation(const Window& w1, const Window& w2, const WindowContext& ctx) {
    if (!is_continuation(w2, w1, ctx)) throw std::invalid_argument("merge: not a continuation");
    return extend_window(w1, w2, ctx);
}

bool degree_bound_holds(const Window& w1, const Window& w2, const FormulaSet& u) {
    std::size_t n = w1.length();
    for (std::size_t i = 1; i <= n; ++i) {
        unsigned bound = monus(u.depth() + static_cast<unsigned>(i), static_cast<unsigned>(n + 1));
        if (set_difference(w2.row(i - 1), w1.row(i)).depth() > bound) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

BigNat window_count_bound(unsigned d, unsigned levels) {
    BigNat s = 1;
    for (unsigned l = 1; l <= levels; ++l) s = BigNat(d) + BigNat(d) * s;
    return s;
}

BigNat mono_count_bound(unsigned d) {
    if (d == 0) throw std::invalid_argument("mono_count_bound needs d >= 1");
    return 2 * boost::multiprecision::pow(BigNat(d), d + 1);
}

std::string ChiDescriptor::text() const {
    return "2^P(" + std::to_string(argument) + ")+" + std::to_string(additive) + ", deg P=" +
           std::to_string(poly_degree);
}

ChiDescriptor chi_descriptor(const FormulaSet& u, const Logic& logic) {
    unsigned pi = logic.mono() ? u.depth() : logic.pi;
    return ChiDescriptor{pi + 2, u.depth(), u.size()};
}

bool chi_dominates(const ChiDescriptor& a, const ChiDescriptor& b) {
    return a.poly_degree >= b.poly_degree && a.argument >= b.argument && a.additive >= b.additive;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

nlohmann::json to_json(const FormulaSet& s, bool mono) {
    nlohmann::json j = nlohmann::json::array();
    for (Formula f : s) j.push_back(to_string(f, mono));
    return j;
}

nlohmann::json to_json(const Window& w, bool mono) {
    if (w.is_empty()) return nullptr;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : w.rows()) rows.push_back(to_json(r, mono));
    nlohmann::json subs = nlohmann::json::array();
    for (const auto& s : w.subs()) subs.push_back(to_json(s, mono));
    return {{"rows", rows}, {"subs", subs}};
}

FormulaSet set_from_json(const nlohmann::json& j, const Logic& logic) {
    std::vector<Formula> fs;
    for (const auto& e : j) fs.push_back(parse(e.get<std::string>(), logic));
    return FormulaSet(std::move(fs));
}

Window window_from_json(const nlohmann::json& j, const Logic& logic) {
    if (j.is_null()) return Window();
    std::vector<FormulaSet> rows;
    for (const auto& r : j.at("rows")) rows.push_back(set_from_json(r, logic));
    std::vector<Window> subs;
    for (const auto& s : j.at("subs")) subs.push_back(window_from_json(s, logic));
    return Window::node(std::move(rows), std::move(subs));
}

}  // namespace kdesat
