#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kdesat/formula.hpp"
#include "kdesat/window.hpp"

namespace kdesat {

// Worlds are 0..size()-1 internally; names are kept for I/O.
class KripkeModel {
public:
    KripkeModel() = default;
    explicit KripkeModel(std::size_t worlds);

    std::size_t size() const { return names_.size(); }
    std::size_t add_world(const std::string& name);
    const std::string& name(std::size_t w) const { return names_.at(w); }
    std::size_t world(const std::string& name) const;  // throws on unknown

    // Relations beyond the highest index used are empty.
    std::size_t relation_count() const { return succ_.size(); }
    void add_edge(unsigned i, std::size_t s, std::size_t t);
    bool has_edge(unsigned i, std::size_t s, std::size_t t) const;
    const std::vector<std::size_t>& successors(unsigned i, std::size_t s) const;

    void set_atom(const std::string& atom, std::size_t w, bool value = true);
    bool atom_holds(const std::string& atom, std::size_t w) const;
    const std::map<std::string, std::vector<char>>& valuation() const { return val_; }

private:
    std::vector<std::string> names_;
    std::vector<std::vector<std::vector<std::size_t>>> succ_;  // [i][s] sorted
    std::map<std::string, std::vector<char>> val_;
};

nlohmann::json model_to_json(const KripkeModel& m);
KripkeModel model_from_json(const nlohmann::json& j);

struct DensityViolation {
    unsigned i;
    std::size_t s;
    std::size_t t;
};
struct DensityReport {
    std::vector<DensityViolation> violations;
    bool dense() const { return violations.empty(); }
};

// Multimodal density for i < pi; in mono mode the single relation 0 must
// satisfy sRt => exists u. sRu and uRt.
DensityReport is_dense(const KripkeModel& m, unsigned pi, bool mono = false);

// Truth sets of formulas, cached per model.
class Evaluator {
public:
    Evaluator(const KripkeModel& m, bool mono) : m_(m), mono_(mono) {}
    const std::vector<char>& truth(Formula f);
    bool holds(Formula f, std::size_t w) { return truth(f)[w] != 0; }
    bool holds(const FormulaSet& s, std::size_t w);

private:
    const KripkeModel& m_;
    bool mono_;
    std::map<std::uint32_t, std::vector<char>> cache_;
};

bool model_check(const KripkeModel& m, std::size_t x, Formula f, bool mono = false);

bool sat_window(const KripkeModel& m, std::size_t x, const Window& w, const WindowContext& ctx);

Window build_window_from_model(const KripkeModel& m, std::size_t x, std::size_t y0,
                               const FormulaSet& u, const FormulaSet& v0, unsigned k,
                               std::size_t n, const Logic& logic);

enum class DenseFamily : std::uint8_t {
    reflexive,  // upper relations contain the identity
    witnessed,  // random relations, then missing witnesses added one level up
};

KripkeModel gen_dense_model(std::uint64_t seed, unsigned pi, std::size_t size,
                            const std::vector<std::string>& atoms = {"p", "q", "r"},
                            DenseFamily family = DenseFamily::reflexive, bool mono = false);

struct SearchOptions {
    unsigned pi = 1;
    std::size_t max_size = 3;
    bool mono = false;
    bool require_dense = true;
};
std::optional<std::pair<KripkeModel, std::size_t>> bounded_model_search(Formula f,
                                                                        const SearchOptions& opt);

KripkeModel disjoint_union(const std::vector<KripkeModel>& models);

}  // namespace kdesat
