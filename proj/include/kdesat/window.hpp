#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kdesat/ccs.hpp"
#include "kdesat/formula.hpp"

namespace kdesat {

using BigNat = boost::multiprecision::cpp_int;

// A window is either Empty or a node with rows v_0..v_n and subwindows
// W_0..W_{n-1}; W_i is a window for (v_{i+1}, v_i) one level deeper.
// Immutable and structurally shared.
class Window {
public:
    Window() = default;  // Empty
    static Window node(std::vector<FormulaSet> rows, std::vector<Window> subs);

    bool is_empty() const { return rep_ == nullptr; }
    std::size_t length() const;  // n
    const std::vector<FormulaSet>& rows() const;
    const std::vector<Window>& subs() const;
    const FormulaSet& row(std::size_t i) const { return rows().at(i); }
    const Window& sub(std::size_t i) const { return subs().at(i); }
    std::size_t hash() const;

    // Replaces v_0 along the spine of first subwindows, all of which share it.
    Window with_first_row(const FormulaSet& v0) const;

    friend bool operator==(const Window& a, const Window& b);
    friend bool operator!=(const Window& a, const Window& b) { return !(a == b); }

private:
    struct Rep {
        std::vector<FormulaSet> rows;
        std::vector<Window> subs;
        std::size_t hash;
    };
    std::shared_ptr<const Rep> rep_;
};

struct WindowHash {
    std::size_t operator()(const Window& w) const { return w.hash(); }
};

enum class LambdaTag : std::uint8_t { depth, chi, infinite };

struct WindowContext {
    Logic logic;
    FormulaSet u;
    unsigned k = 0;
    std::size_t n = 0;
    LambdaTag lambda_tag = LambdaTag::depth;
    // What v_0 must contain besides the row requirements: the diamond's CCS at
    // top level, the parent's row for a subwindow, the previous window's v_1
    // for a continuation.
    std::optional<FormulaSet> v0_seed;
};

// Rows v_a..v_b and subwindows W_a..W_{b-1}; a view, nothing is copied.
struct WindowSlice {
    Window window;
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t width() const { return b - a; }
};

// Relation used by level k, and whether level k windows for u are Empty.
unsigned relation_at(const Logic& logic, unsigned level);
bool is_leaf(const Logic& logic, unsigned level, const FormulaSet& u);

// What a window requires of its v_0 through its first subwindow spine.
FormulaSet first_row_demand(const Window& w, unsigned level, const Logic& logic);
// The set row i of w must be a CCS of (v_0 also gets the context seed).
FormulaSet row_seed(const Window& w, std::size_t i, unsigned level, const FormulaSet& u,
                    const Logic& logic);

bool is_window(const Window& w, const WindowContext& ctx);

std::vector<FormulaSet> members(const Window& w);
std::size_t member_count(const Window& w);  // with multiplicity

WindowSlice partial(const Window& w, std::size_t a, std::size_t b);

// u2 is the set governing the window of s2 (needed for its row seeds).
bool pointwise_included(const WindowSlice& s1, const WindowSlice& s2, unsigned k,
                        const FormulaSet& u2, const Logic& logic);

bool is_continuation(const Window& w2, const Window& w1, const WindowContext& ctx);
Window merge_continuation(const Window& w1, const Window& w2, const WindowContext& ctx);
// Appends the continuation w2 of the last n+1 columns of l (length >= n).
Window extend_window(const Window& l, const Window& w2, const WindowContext& ctx);
bool degree_bound_holds(const Window& w1, const Window& w2, const FormulaSet& u);

BigNat window_count_bound(unsigned d, unsigned levels);
BigNat mono_count_bound(unsigned d);

struct ChiDescriptor {
    unsigned poly_degree = 0;  // degree of P in 2^{P(|u|)} + d(u)
    unsigned additive = 0;     // d(u)
    unsigned argument = 0;     // |u|
    std::string text() const;
};
ChiDescriptor chi_descriptor(const FormulaSet& u, const Logic& logic);
bool chi_dominates(const ChiDescriptor& a, const ChiDescriptor& b);

nlohmann::json to_json(const FormulaSet& s, bool mono);
nlohmann::json to_json(const Window& w, bool mono);
FormulaSet set_from_json(const nlohmann::json& j, const Logic& logic);
Window window_from_json(const nlohmann::json& j, const Logic& logic);

}  // namespace kdesat
