#include "kdesat/solver.hpp"

namespace kdesat {

// Windows are built from the top row down. Row i needs the demand that its
// subwindow W_i places on position 0, so W_i's body (every row but the
// shared first one) is generated before v_i, and v_i is then patched into
// the body's first-row spine.

namespace {

// Constraint from an earlier window: new position i must include old
// position i + shift.
struct OldView {
    const Window* w = nullptr;
    std::size_t shift = 0;

    const FormulaSet* row(std::size_t i) const {
        if (w == nullptr || w->is_empty() || i + shift > w->length()) return nullptr;
        return &w->row(i + shift);
    }
    OldView sub(std::size_t i) const {
        if (w == nullptr || w->is_empty() || i + shift >= w->length()) return {};
        return OldView{&w->sub(i + shift), 0};
    }
};

using BodySink = std::function<bool(const Window&, const FormulaSet&)>;

class BodyGen {
public:
    BodyGen(const Logic& logic, const CcsSource& ccs) : logic_(logic), ccs_(ccs) {}

    // Bodies of windows for u at `level` of length n; the sink also gets the
    // demand the body places on its (missing) first row.
    bool bodies(const FormulaSet& u, unsigned level, std::size_t n, OldView old,
                const BodySink& sink) {
        if (is_leaf(logic_, level, u)) return sink(Window(), FormulaSet());
        Frame fr{std::vector<FormulaSet>(n + 1), std::vector<Window>(n),
                 box_minus(relation_at(logic_, level), u), level, old, &sink};
        if (n == 0) return sink(Window::node(fr.rows, fr.subs), FormulaSet());
        FormulaSet top = fr.base;
        if (const FormulaSet* r = old.row(n)) top.unite(*r);
        CcsList vs = ccs_(top);
        for (const auto& v : *vs) {
            fr.rows[n] = v;
            if (fill(fr, n - 1)) return true;
        }
        return false;
    }

private:
    struct Frame {
        std::vector<FormulaSet> rows;
        std::vector<Window> subs;
        FormulaSet base;
        unsigned level;
        OldView old;
        const BodySink* sink;
    };

    bool fill(Frame& fr, std::size_t i) {
        const FormulaSet up = fr.rows[i + 1];
        unsigned next = relation_at(logic_, fr.level + 1);
        if (i == 0) {
            return bodies(up, fr.level + 1, up.depth(), fr.old.sub(0),
                          [&](const Window& body, const FormulaSet& dem) {
                              fr.subs[0] = body;
                              FormulaSet demand = box_minus(next, up);
                              demand.unite(dem);
                              return (*fr.sink)(Window::node(fr.rows, fr.subs), demand);
                          });
        }
        return bodies(up, fr.level + 1, up.depth(), fr.old.sub(i),
                      [&](const Window& body, const FormulaSet& dem) {
                          FormulaSet seed = fr.base;
                          seed.unite(box_minus(next, up));
                          seed.unite(dem);
                          if (const FormulaSet* r = fr.old.row(i)) seed.unite(*r);
                          CcsList vs = ccs_(seed);
                          for (const auto& v : *vs) {
                              fr.rows[i] = v;
                              fr.subs[i] = body.with_first_row(v);
                              if (fill(fr, i - 1)) return true;
                          }
                          return false;
                      });
    }

    const Logic& logic_;
    const CcsSource& ccs_;
};

bool close_first_row(const Window& body, const FormulaSet& dem, const FormulaSet& base,
                     const FormulaSet& v0, const CcsSource& ccs, const WindowSink& sink) {
    if (body.is_empty()) return sink(body);
    FormulaSet seed = v0;
    seed.unite(base);
    seed.unite(dem);
    CcsList rs = ccs(seed);
    for (const auto& r0 : *rs)
        if (sink(body.with_first_row(r0))) return true;
    return false;
}

CcsSource plain_source(const SolverConfig& cfg) {
    return [mode = cfg.ccs](const FormulaSet& s) {
        return std::make_shared<const std::vector<FormulaSet>>(enumerate_ccs(s, mode));
    };
}

}  // namespace

bool for_each_window(const FormulaSet& u, const FormulaSet& v0, unsigned k, const Logic& logic,
                     const CcsSource& ccs, const WindowSink& sink) {
    BodyGen gen(logic, ccs);
    FormulaSet base = box_minus(relation_at(logic, k), u);
    return gen.bodies(u, k, u.depth(), OldView{},
                      [&](const Window& body, const FormulaSet& dem) {
                          return close_first_row(body, dem, base, v0, ccs, sink);
                      });
}

bool for_each_continuation(const Window& w, const FormulaSet& u, unsigned k, const Logic& logic,
                           const CcsSource& ccs, const WindowSink& sink) {
    if (w.is_empty() || w.length() == 0) return false;
    BodyGen gen(logic, ccs);
    FormulaSet base = box_minus(relation_at(logic, k), u);
    const FormulaSet& v1 = w.row(1);
    return gen.bodies(u, k, w.length(), OldView{&w, 1},
                      [&](const Window& body, const FormulaSet& dem) {
                          return close_first_row(body, dem, base, v1, ccs, sink);
                      });
}

std::vector<Window> enumerate_windows(const FormulaSet& u, const FormulaSet& v0, unsigned k,
                                      const SolverConfig& cfg) {
    std::vector<Window> out;
    for_each_window(u, v0, k, cfg.logic, plain_source(cfg), [&](const Window& w) {
        out.push_back(w);
        return false;
    });
    return out;
}

std::vector<Window> enumerate_continuations(const Window& w, const FormulaSet& u, unsigned k,
                                            const SolverConfig& cfg) {
    std::vector<Window> out;
    for_each_continuation(w, u, k, cfg.logic, plain_source(cfg), [&](const Window& x) {
        out.push_back(x);
        return false;
    });
    return out;
}

}  // namespace kdesat
