#include "kdesat/formula.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <mutex>
#include <set>
#include <unordered_set>

namespace kdesat {

struct FormulaNode {
    Kind kind;
    unsigned index;
    std::string name;
    const FormulaNode* left;
    const FormulaNode* right;
    unsigned depth;
    unsigned size;
    std::size_t hash;
    std::uint32_t id;
};

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

std::size_t name_hash(std::string_view s) {
    std::size_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct NodeKeyHash {
    std::size_t operator()(const FormulaNode* n) const { return n->hash; }
};
struct NodeKeyEq {
    bool operator()(const FormulaNode* a, const FormulaNode* b) const {
        return a->kind == b->kind && a->index == b->index && a->left == b->left &&
               a->right == b->right && a->name == b->name;
    }
};

}  // namespace

class Interner {
public:
    static Interner& get() {
        static Interner instance;
        return instance;
    }

    Formula make(Kind kind, unsigned index, std::string_view name, const FormulaNode* l,
                 const FormulaNode* r) {
        FormulaNode probe{kind, index, std::string(name), l, r, 0, 0, 0, 0};
        std::size_t h = mix(static_cast<std::size_t>(kind) + 1, index);
        h = mix(h, name_hash(name));
        h = mix(h, l ? l->hash : 7);
        h = mix(h, r ? r->hash : 13);
        probe.hash = h;
        std::lock_guard<std::mutex> lock(mu_);
        auto it = table_.find(&probe);
        if (it != table_.end()) return Formula(*it);
        switch (kind) {
            case Kind::Atom:
            case Kind::Bottom:
                probe.depth = 0;
                probe.size = 1;
                break;
            case Kind::Neg:
                probe.depth = l->depth;
                probe.size = l->size + 1;
                break;
            case Kind::And:
                probe.depth = std::max(l->depth, r->depth);
                probe.size = l->size + r->size + 1;
                break;
            case Kind::Box:
                probe.depth = l->depth + 1;
                probe.size = l->size + 1;
                break;
        }
        probe.id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(std::move(probe));
        const FormulaNode* n = &nodes_.back();
        table_.insert(n);
        return Formula(n);
    }

private:
    std::mutex mu_;
    std::deque<FormulaNode> nodes_;
    std::unordered_set<const FormulaNode*, NodeKeyHash, NodeKeyEq> table_;
};

// ---------------------------------------------------------------------------
// Formula
// ---------------------------------------------------------------------------

Formula Formula::atom(std::string_view name) {
    return Interner::get().make(Kind::Atom, 0, name, nullptr, nullptr);
}
Formula Formula::bottom() { return Interner::get().make(Kind::Bottom, 0, "", nullptr, nullptr); }
Formula Formula::top() { return neg(bottom()); }
Formula Formula::neg(Formula f) { return Interner::get().make(Kind::Neg, 0, "", f.node_, nullptr); }
Formula Formula::conj(Formula a, Formula b) {
    return Interner::get().make(Kind::And, 0, "", a.node_, b.node_);
}
Formula Formula::box(unsigned index, Formula f) {
    return Interner::get().make(Kind::Box, index, "", f.node_, nullptr);
}
Formula Formula::diamond(unsigned index, Formula f) { return neg(box(index, neg(f))); }
Formula Formula::disj(Formula a, Formula b) { return neg(conj(neg(a), neg(b))); }
Formula Formula::implies(Formula a, Formula b) { return neg(conj(a, neg(b))); }

Kind Formula::kind() const { return node_->kind; }
unsigned Formula::index() const { return node_->index; }
const std::string& Formula::name() const { return node_->name; }
Formula Formula::child() const { return Formula(node_->left); }
Formula Formula::left() const { return Formula(node_->left); }
Formula Formula::right() const { return Formula(node_->right); }
unsigned Formula::depth() const { return node_->depth; }
unsigned Formula::size() const { return node_->size; }
std::size_t Formula::hash() const { return node_->hash; }
std::uint32_t Formula::id() const { return node_->id; }

bool Formula::is_diamond() const {
    return kind() == Kind::Neg && child().kind() == Kind::Box &&
           child().child().kind() == Kind::Neg;
}

int compare(Formula a, Formula b) {
    if (a == b) return 0;
    const FormulaNode* x = a.node();
    const FormulaNode* y = b.node();
    if (x->depth != y->depth) return x->depth < y->depth ? -1 : 1;
    if (x->size != y->size) return x->size < y->size ? -1 : 1;
    if (x->kind != y->kind) return x->kind < y->kind ? -1 : 1;
    switch (x->kind) {
        case Kind::Atom:
            return x->name < y->name ? -1 : 1;
        case Kind::Bottom:
            return 0;
        case Kind::Box:
            if (x->index != y->index) return x->index < y->index ? -1 : 1;
            return compare(a.child(), b.child());
        case Kind::Neg:
            return compare(a.child(), b.child());
        case Kind::And: {
            int c = compare(a.left(), b.left());
            return c != 0 ? c : compare(a.right(), b.right());
        }
    }
    return 0;
}

unsigned depth(Formula f) { return f.depth(); }
unsigned size(Formula f) { return f.size(); }
unsigned monus(unsigned n, unsigned m) { return n > m ? n - m : 0; }

// ---------------------------------------------------------------------------
// FormulaSet
// ---------------------------------------------------------------------------

FormulaSet::FormulaSet(std::initializer_list<Formula> fs) : FormulaSet(std::vector<Formula>(fs)) {}

FormulaSet::FormulaSet(std::vector<Formula> fs) : items_(std::move(fs)) {
    std::sort(items_.begin(), items_.end(), FormulaLess{});
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
    recompute();
}

void FormulaSet::recompute() {
    depth_ = 0;
    size_ = 0;
    for (Formula f : items_) {
        depth_ = std::max(depth_, f.depth());
        size_ += f.size();
    }
}

bool FormulaSet::insert(Formula f) {
    auto it = std::lower_bound(items_.begin(), items_.end(), f, FormulaLess{});
    if (it != items_.end() && *it == f) return false;
    items_.insert(it, f);
    depth_ = std::max(depth_, f.depth());
    size_ += f.size();
    return true;
}

bool FormulaSet::contains(Formula f) const {
    return std::binary_search(items_.begin(), items_.end(), f, FormulaLess{});
}

void FormulaSet::unite(const FormulaSet& other) {
    if (other.items_.empty()) return;
    std::vector<Formula> out;
    out.reserve(items_.size() + other.items_.size());
    std::set_union(items_.begin(), items_.end(), other.items_.begin(), other.items_.end(),
                   std::back_inserter(out), FormulaLess{});
    items_ = std::move(out);
    recompute();
}

std::size_t FormulaSet::hash() const {
    std::size_t h = 0x51ed27;
    for (Formula f : items_) h = mix(h, f.hash());
    return h;
}

bool FormulaSet::is_subset_of(const FormulaSet& other) const {
    return std::includes(other.items_.begin(), other.items_.end(), items_.begin(), items_.end(),
                         FormulaLess{});
}

FormulaSet set_union(const FormulaSet& a, const FormulaSet& b) {
    FormulaSet r = a;
    r.unite(b);
    return r;
}

FormulaSet set_difference(const FormulaSet& a, const FormulaSet& b) {
    std::vector<Formula> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out),
                        FormulaLess{});
    return FormulaSet(std::move(out));
}

int compare(const FormulaSet& a, const FormulaSet& b) {
    const auto& x = a.items();
    const auto& y = b.items();
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        int c = compare(x[i], y[i]);
        if (c != 0) return c;
    }
    if (x.size() == y.size()) return 0;
    return x.size() < y.size() ? -1 : 1;
}

// ---------------------------------------------------------------------------
// Closures
// ---------------------------------------------------------------------------

namespace {

template <typename Step>
FormulaSet close_under(const FormulaSet& s, Step step) {
    std::unordered_set<Formula, FormulaHash> seen(s.begin(), s.end());
    std::vector<Formula> work(s.begin(), s.end());
    std::vector<Formula> out(s.begin(), s.end());
    auto add = [&](Formula g) {
        if (seen.insert(g).second) {
            work.push_back(g);
            out.push_back(g);
        }
    };
    while (!work.empty()) {
        Formula f = work.back();
        work.pop_back();
        step(f, add);
    }
    return FormulaSet(std::move(out));
}

template <typename Add>
void classical_step(Formula f, Add& add) {
    if (f.kind() == Kind::And) {
        add(f.left());
        add(f.right());
    } else if (f.kind() == Kind::Neg) {
        Formula g = f.child();
        add(g);
        if (g.kind() == Kind::And) {
            add(Formula::neg(g.left()));
            add(Formula::neg(g.right()));
        }
    }
}

}  // namespace

FormulaSet csf(const FormulaSet& s) {
    return close_under(s, [](Formula f, auto& add) { classical_step(f, add); });
}

FormulaSet sf(const FormulaSet& s) {
    return close_under(s, [](Formula f, auto& add) {
        classical_step(f, add);
        if (f.kind() == Kind::Box) add(f.child());
        if (f.kind() == Kind::Neg && f.child().kind() == Kind::Box)
            add(Formula::neg(f.child().child()));
    });
}

int max_index(Formula f) {
    switch (f.kind()) {
        case Kind::Atom:
        case Kind::Bottom:
            return -1;
        case Kind::Neg:
            return max_index(f.child());
        case Kind::And:
            return std::max(max_index(f.left()), max_index(f.right()));
        case Kind::Box:
            return std::max(static_cast<int>(f.index()), max_index(f.child()));
    }
    return -1;
}

std::vector<std::string> atoms_of(Formula f) {
    std::set<std::string> acc;
    std::vector<Formula> stack{f};
    while (!stack.empty()) {
        Formula g = stack.back();
        stack.pop_back();
        switch (g.kind()) {
            case Kind::Atom: acc.insert(g.name()); break;
            case Kind::Bottom: break;
            case Kind::Neg:
            case Kind::Box: stack.push_back(g.child()); break;
            case Kind::And:
                stack.push_back(g.left());
                stack.push_back(g.right());
                break;
        }
    }
    return {acc.begin(), acc.end()};
}

void check_indices(Formula f, const Logic& logic) {
    int m = max_index(f);
    if (logic.mono()) {
        if (m > 0) throw std::invalid_argument("kde-mono formulas use a single modality");
    } else if (m > static_cast<int>(logic.pi)) {
        throw std::invalid_argument("modality index " + std::to_string(m) +
                                    " out of range for pi=" + std::to_string(logic.pi));
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(std::string_view text, const Logic& logic) : s_(text), logic_(logic) {}

    Formula run() {
        Formula f = implication();
        skip();
        if (pos_ != s_.size()) fail("unexpected input");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(std::string_view tok) {
        skip();
        if (s_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    Formula implication() {
        Formula lhs = disjunction();
        if (eat("->")) return Formula::implies(lhs, implication());
        return lhs;
    }

    Formula disjunction() {
        Formula f = conjunction();
        while (eat("|")) f = Formula::disj(f, conjunction());
        return f;
    }

    Formula conjunction() {
        Formula f = unary();
        while (eat("&")) f = Formula::conj(f, unary());
        return f;
    }

    unsigned modality(char close) {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        std::string digits(s_.substr(start, pos_ - start));
        unsigned idx = 0;
        if (logic_.mono()) {
            if (!digits.empty()) {
                pos_ = start;
                fail("modality index not allowed in kde-mono mode");
            }
        } else {
            if (digits.empty()) fail("expected modality index");
            if (digits.size() > 9) {
                pos_ = start;
                fail("modality index out of range");
            }
            idx = static_cast<unsigned>(std::stoul(digits));
            if (idx > logic_.pi) {
                pos_ = start;
                fail("modality index " + digits + " out of range for pi=" +
                     std::to_string(logic_.pi));
            }
        }
        skip();
        if (pos_ >= s_.size() || s_[pos_] != close) fail(std::string("expected '") + close + "'");
        ++pos_;
        return idx;
    }

    Formula unary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '~') {
            ++pos_;
            return Formula::neg(unary());
        }
        if (c == '[') {
            ++pos_;
            unsigned i = modality(']');
            return Formula::box(i, unary());
        }
        if (c == '<') {
            ++pos_;
            unsigned i = modality('>');
            return Formula::diamond(i, unary());
        }
        if (c == '(') {
            ++pos_;
            Formula f = implication();
            if (!eat(")")) fail("expected ')'");
            return f;
        }
        if (c >= 'a' && c <= 'z') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string_view word = s_.substr(start, pos_ - start);
            if (word == "bot") return Formula::bottom();
            if (word == "top") return Formula::top();
            return Formula::atom(word);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view s_;
    const Logic& logic_;
    std::size_t pos_ = 0;
};

// Unary operators print their And-operand in parentheses.
void print_top(Formula f, bool mono, std::string& out);

void print_unary_arg(Formula g, bool mono, std::string& out) {
    if (g.kind() == Kind::And) {
        out += '(';
        print_top(g, mono, out);
        out += ')';
    } else {
        print_top(g, mono, out);
    }
}

void print_top(Formula f, bool mono, std::string& out) {
    switch (f.kind()) {
        case Kind::Neg:
            out += '~';
            print_unary_arg(f.child(), mono, out);
            return;
        case Kind::Box:
            out += '[';
            if (!mono) out += std::to_string(f.index());
            out += ']';
            print_unary_arg(f.child(), mono, out);
            return;
        case Kind::And: {
            auto side = [&](Formula g) {
                if (g.kind() == Kind::And) {
                    out += '(';
                    print_top(g, mono, out);
                    out += ')';
                } else {
                    print_top(g, mono, out);
                }
            };
            side(f.left());
            out += " & ";
            side(f.right());
            return;
        }
        case Kind::Atom: out += f.name(); return;
        case Kind::Bottom: out += "bot"; return;
    }
}

}  // namespace

Formula parse(std::string_view text, const Logic& logic) { return Parser(text, logic).run(); }

std::string to_string(Formula f, bool mono) {
    std::string out;
    print_top(f, mono, out);
    return out;
}

std::string to_string(const FormulaSet& s, bool mono) {
    std::string out = "{";
    bool first = true;
    for (Formula f : s) {
        if (!first) out += ", ";
        first = false;
        out += to_string(f, mono);
    }
    return out + "}";
}

}  // namespace kdesat
