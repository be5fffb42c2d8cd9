#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kdesat {

// ---------------------------------------------------------------------------
// Logic selection
// ---------------------------------------------------------------------------

enum class Mode : std::uint8_t { kde_pi, kde_mono };

struct Logic {
    unsigned pi = 1;
    Mode mode = Mode::kde_pi;

    bool mono() const { return mode == Mode::kde_mono; }
};

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

enum class Kind : std::uint8_t { Atom, Bottom, Neg, And, Box };

struct FormulaNode;

// Handle to an interned, immutable node. Two handles are structurally equal
// iff they point at the same node.
class Formula {
public:
    Formula() = default;

    static Formula atom(std::string_view name);
    static Formula bottom();
    static Formula top();  // ~bot
    static Formula neg(Formula f);
    static Formula conj(Formula a, Formula b);
    static Formula box(unsigned index, Formula f);
    static Formula diamond(unsigned index, Formula f);  // ~[i]~f
    static Formula disj(Formula a, Formula b);          // ~(~a & ~b)
    static Formula implies(Formula a, Formula b);       // ~(a & ~b)

    explicit operator bool() const { return node_ != nullptr; }

    Kind kind() const;
    unsigned index() const;  // Box only
    const std::string& name() const;  // Atom only
    Formula child() const;  // Neg, Box
    Formula left() const;   // And
    Formula right() const;  // And

    unsigned depth() const;
    unsigned size() const;
    std::size_t hash() const;
    std::uint32_t id() const;

    bool is_neg() const { return kind() == Kind::Neg; }
    bool is_box() const { return kind() == Kind::Box; }
    // ~[i]phi
    bool is_diamond() const;

    friend bool operator==(Formula a, Formula b) { return a.node_ == b.node_; }
    friend bool operator!=(Formula a, Formula b) { return a.node_ != b.node_; }

    const FormulaNode* node() const { return node_; }

private:
    explicit Formula(const FormulaNode* n) : node_(n) {}
    const FormulaNode* node_ = nullptr;
    friend class Interner;
};

// Deterministic structural total order, independent of interning order.
int compare(Formula a, Formula b);
struct FormulaLess {
    bool operator()(Formula a, Formula b) const { return compare(a, b) < 0; }
};
struct FormulaHash {
    std::size_t operator()(Formula f) const { return f.hash(); }
};

unsigned depth(Formula f);
unsigned size(Formula f);
unsigned monus(unsigned n, unsigned m);

// ---------------------------------------------------------------------------
// Formula sets: sorted by the structural order, cached depth and size.
// ---------------------------------------------------------------------------

class FormulaSet {
public:
    FormulaSet() = default;
    FormulaSet(std::initializer_list<Formula> fs);
    explicit FormulaSet(std::vector<Formula> fs);

    bool insert(Formula f);
    bool contains(Formula f) const;
    void unite(const FormulaSet& other);

    bool empty() const { return items_.empty(); }
    std::size_t count() const { return items_.size(); }
    unsigned depth() const { return depth_; }
    unsigned size() const { return size_; }
    std::size_t hash() const;

    bool is_subset_of(const FormulaSet& other) const;

    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }
    const std::vector<Formula>& items() const { return items_; }

    friend bool operator==(const FormulaSet& a, const FormulaSet& b) { return a.items_ == b.items_; }
    friend bool operator!=(const FormulaSet& a, const FormulaSet& b) { return !(a == b); }

private:
    void recompute();
    std::vector<Formula> items_;
    unsigned depth_ = 0;
    unsigned size_ = 0;
};

FormulaSet set_union(const FormulaSet& a, const FormulaSet& b);
FormulaSet set_difference(const FormulaSet& a, const FormulaSet& b);
// Lexicographic order on the sorted member lists.
int compare(const FormulaSet& a, const FormulaSet& b);

struct FormulaSetHash {
    std::size_t operator()(const FormulaSet& s) const { return s.hash(); }
};

FormulaSet csf(const FormulaSet& s);
FormulaSet sf(const FormulaSet& s);

// Largest modality index appearing in f, or -1 if f is box-free.
int max_index(Formula f);
std::vector<std::string> atoms_of(Formula f);

// ---------------------------------------------------------------------------
// Text
// ---------------------------------------------------------------------------

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

Formula parse(std::string_view text, const Logic& logic);
std::string to_string(Formula f, bool mono = false);
std::string to_string(const FormulaSet& s, bool mono = false);

// Throws std::invalid_argument if f uses an index the logic does not have.
void check_indices(Formula f, const Logic& logic);

}  // namespace kdesat
