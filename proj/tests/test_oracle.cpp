#include "doctest.h"
#include "support.hpp"

#include "kdesat/semantics.hpp"

using namespace testing;

namespace {

SolverConfig cfg_for(unsigned pi) {
    SolverConfig c;
    c.logic = pi_logic(pi);
    return c;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("k tableau examples") {
    CHECK_FALSE(k_sat(P("<0>p & [0]~p", 1)));
    CHECK(k_sat(P("[0]p", 1)));
    CHECK_FALSE(k_sat(P("bot", 1)));
    CHECK(k_sat(P("<1>p & <1>~p", 1)));
    CHECK_FALSE(k_sat(P("<1>(p & q) & [1](q -> ~p)", 1)));
    CHECK(k_sat(P("~([1]p -> [1][1]p)", 1)));
    CHECK_THROWS_AS(k_sat(P("[0]p & [1]p", 1)), std::invalid_argument);
}

TEST_CASE("k tableau agrees with model search on every formula up to size 7") {
    SearchOptions opt;
    opt.pi = 0;
    opt.max_size = 3;
    opt.require_dense = false;
    std::size_t total = 0, satisfiable = 0;
    for (unsigned n = 1; n <= 7; ++n)
        for (Formula f : all_formulas(n, "p", 0)) {
            bool k = k_sat(f);
            bool found = bounded_model_search(f, opt).has_value();
            CHECK_MESSAGE(k == found, to_string(f));
            ++total;
            satisfiable += k;
        }
    CHECK(total == 2 + 4 + 12 + 40 + 144 + 544 + 2128);
    MESSAGE(total << " formulas, " << satisfiable << " satisfiable");
}

TEST_CASE("tautology check") {
    CHECK(is_tautology(P("p -> p", 1)));
    CHECK(is_tautology(P("[0]q | ~[0]q", 1)));
    CHECK_FALSE(is_tautology(P("[0]q -> q", 1)));
    CHECK_FALSE(is_tautology(P("p", 1)));
}

TEST_CASE("hand-written derivations") {
    Logic l = pi_logic(1);
    Formula qr = P("q & r", 1);
    Theorem dens{P("[0][1](q & r) -> [0](q & r)", 1),
                 {{Rule::axiom, "D", 0, {{"p", qr}}, {}, P("[0][1](q & r) -> [0](q & r)", 1)}}};
    CHECK(replay(dens, l).empty());

    Theorem nec{P("[1](p -> p)", 1),
                {{Rule::tautology, "id", 0, {{"A", P("p", 1)}}, {}, P("p -> p", 1)},
                 {Rule::necessitation, "", 1, {}, {0}, P("[1](p -> p)", 1)}}};
    CHECK(replay(nec, l).empty());

    // MP chain on A2: [0]a & [0]b gives [0](a & b)
    Formula a = P("p -> p", 1), b = P("q | ~q", 1);
    Formula ba = Formula::box(0, a), bb = Formula::box(0, b);
    std::vector<Step> d;
    d.push_back({Rule::tautology, "id", 0, {{"A", P("p", 1)}}, {}, a});
    d.push_back({Rule::necessitation, "", 0, {}, {0}, ba});
    d.push_back({Rule::tautology, "lem", 0, {{"A", P("q", 1)}}, {}, b});
    d.push_back({Rule::necessitation, "", 0, {}, {2}, bb});
    Formula andi = Formula::implies(ba, Formula::implies(bb, Formula::conj(ba, bb)));
    d.push_back({Rule::tautology, "and-i", 0, {{"A", ba}, {"B", bb}}, {}, andi});
    d.push_back({Rule::modus_ponens, "", 0, {}, {1, 4}, Formula::implies(bb, Formula::conj(ba, bb))});
    d.push_back({Rule::modus_ponens, "", 0, {}, {3, 5}, Formula::conj(ba, bb)});
    Formula a2 = Formula::implies(Formula::conj(ba, bb), Formula::box(0, Formula::conj(a, b)));
    d.push_back({Rule::axiom, "A2", 0, {{"p", a}, {"q", b}}, {}, a2});
    d.push_back({Rule::modus_ponens, "", 0, {}, {6, 7}, Formula::box(0, Formula::conj(a, b))});
    Theorem chain{Formula::box(0, Formula::conj(a, b)), d};
    CHECK(replay(chain, l).empty());

    Theorem broken = chain;
    broken.derivation[8].from = {3, 7};
    CHECK_FALSE(replay(broken, l).empty());
    Theorem wrong_axiom = dens;
    wrong_axiom.derivation[0].formula = P("[0]p -> [0][1]p", 1);
    wrong_axiom.formula = wrong_axiom.derivation[0].formula;
    CHECK_FALSE(replay(wrong_axiom, l).empty());
    Theorem bad_index = dens;
    bad_index.derivation[0].index = 1;
    CHECK_FALSE(replay(bad_index, l).empty());
}

TEST_CASE("generated theorems replay and are deterministic") {
    for (unsigned pi : {0U, 1U, 2U, 3U}) {
        auto ts = gen_theorems(17, 300, cfg_for(pi));
        REQUIRE(ts.size() == 300);
        std::size_t density = 0;
        for (const auto& t : ts) {
            CHECK_MESSAGE(replay(t, pi_logic(pi)).empty(), to_string(t.formula));
            for (const auto& s : t.derivation) density += s.axiom == "D";
        }
        if (pi > 0) CHECK(density > 100);
        auto again = gen_theorems(17, 300, cfg_for(pi));
        for (std::size_t i = 0; i < ts.size(); ++i) CHECK(again[i].formula == ts[i].formula);
    }
    SolverConfig m;
    m.logic = mono_logic();
    for (const auto& t : gen_theorems(5, 200, m)) CHECK(replay(t, mono_logic()).empty());
}

TEST_CASE("generated theorems are valid on dense models") {
    for (unsigned pi : {1U, 2U}) {
        auto ts = gen_theorems(23, 100, cfg_for(pi));
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            KripkeModel m = gen_dense_model(seed, pi, 1 + seed % 5, {"p", "q", "r"},
                                            seed % 2 ? DenseFamily::witnessed : DenseFamily::reflexive);
            for (const auto& t : ts)
                for (std::size_t x = 0; x < m.size(); ++x) CHECK(model_check(m, x, t.formula));
        }
    }
}

TEST_CASE("formula generators") {
    RandomFormulaSpec spec;
    spec.indices = {0, 1};
    spec.max_depth = 3;
    spec.max_size = 14;
    for (std::uint64_t s = 0; s < 2000; ++s) {
        Formula f = random_formula(s, spec);
        CHECK(f.size() <= spec.max_size);
        CHECK(f.depth() <= spec.max_depth);
        CHECK(random_formula(s, spec) == f);
    }
    CHECK(all_formulas(1, "p", 0).size() == 2);
    CHECK(all_formulas(3, "p", 0).size() == 12);
    auto five = all_formulas(5, "p", 0);
    CHECK(std::set<Formula, FormulaLess>(five.begin(), five.end()).size() == five.size());
}

TEST_CASE("differential harness") {
    auto corpus = k_fragment_corpus(3, 50, 1, 4);
    auto rec = differential_run(corpus, Suite::k_fragment, cfg_for(1));
    REQUIRE(rec.size() == corpus.size());
    for (const auto& r : rec) CHECK_MESSAGE(r.agree(), to_json(r).dump());
    auto j = to_json(rec.back());
    CHECK(j.contains("formula"));
    CHECK(j.contains("solver_verdict"));
    CHECK(j.contains("oracle_verdict"));
    CHECK(j.contains("seed"));
    auto th = differential_run(theorem_corpus(4, 30, cfg_for(2)), Suite::theorems, cfg_for(2));
    for (const auto& r : th) CHECK_MESSAGE(r.agree(), to_json(r).dump());
    auto mt = differential_run(model_truth_corpus(5, 30, 2, 6, 3), Suite::model_truths, cfg_for(2));
    for (const auto& r : mt) CHECK_MESSAGE(r.agree(), to_json(r).dump());
}

}
