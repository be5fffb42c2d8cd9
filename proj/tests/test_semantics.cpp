#include "doctest.h"
#include "support.hpp"

#include "kdesat/semantics.hpp"

using namespace testing;

namespace {

KripkeModel countermodel() {
    KripkeModel m;
    std::size_t x = m.add_world("x"), t = m.add_world("t"), u = m.add_world("u");
    m.add_edge(0, x, t);
    m.add_edge(1, t, t);
    m.add_edge(1, t, u);
    m.set_atom("p", t);
    return m;
}

// A CCS true at x: the members of CSF(f) that hold there.
FormulaSet truth_ccs(Evaluator& ev, const FormulaSet& seed, std::size_t x) {
    std::vector<Formula> out;
    for (Formula g : csf(seed))
        if (ev.holds(g, x)) out.push_back(g);
    return FormulaSet(out);
}

}  // namespace

TEST_SUITE("semantics") {

TEST_CASE("density check") {
    CHECK(is_dense(KripkeModel(1), 1).dense());
    KripkeModel m(2);
    m.add_edge(0, 0, 1);
    auto r = is_dense(m, 1);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].i == 0);
    CHECK(r.violations[0].s == 0);
    CHECK(r.violations[0].t == 1);
    m.add_edge(1, 1, 1);
    CHECK(is_dense(m, 1).dense());
    // mono: a single edge needs a two-step path
    KripkeModel mono(2);
    mono.add_edge(0, 0, 1);
    CHECK_FALSE(is_dense(mono, 1, true).dense());
    mono.add_edge(0, 1, 1);
    CHECK(is_dense(mono, 1, true).dense());
}

TEST_CASE("model checking") {
    KripkeModel one(1);
    CHECK_FALSE(model_check(one, 0, P("bot")));
    CHECK(model_check(one, 0, P("[0]p")));
    KripkeModel m = countermodel();
    CHECK_FALSE(model_check(m, m.world("x"), P("[0]p -> [0][1]p", 1)));
    CHECK(is_dense(m, 1).dense());
    CHECK_THROWS(model_check(m, 7, P("p")));
    CHECK_THROWS(m.world("nope"));
}

TEST_CASE("model json") {
    KripkeModel m = countermodel();
    nlohmann::json j = model_to_json(m);
    CHECK(j["relations"]["1"].size() == 2);
    KripkeModel back = model_from_json(j);
    CHECK(model_to_json(back) == j);
    auto parsed = model_from_json(nlohmann::json::parse(
        R"({"worlds":["w0","w1"],"relations":{"0":[["w0","w1"]],"1":[["w1","w1"]]},"valuation":{"p":["w1"]}})"));
    CHECK(model_check(parsed, 0, P("[0]p & <0>p", 1)));
    CHECK(is_dense(parsed, 1).dense());
}

TEST_CASE("generated models are dense") {
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        unsigned pi = static_cast<unsigned>(seed % 3);
        auto fam = seed % 2 ? DenseFamily::witnessed : DenseFamily::reflexive;
        KripkeModel m = gen_dense_model(seed, pi, 1 + seed % 6, {"p", "q"}, fam);
        REQUIRE(is_dense(m, pi).dense());
    }
    for (std::uint64_t seed = 0; seed < 500; ++seed)
        REQUIRE(is_dense(gen_dense_model(seed, 1, 1 + seed % 5, {"p"}, DenseFamily::witnessed, true), 1, true)
                    .dense());
    KripkeModel one = gen_dense_model(3, 2, 1);
    CHECK(one.size() == 1);
    CHECK(is_dense(one, 2).dense());
    KripkeModel total(3);
    for (unsigned i = 0; i < 3; ++i)
        for (std::size_t s = 0; s < 3; ++s)
            for (std::size_t t = 0; t < 3; ++t) total.add_edge(i, s, t);
    CHECK(is_dense(total, 2).dense());
}

TEST_CASE("density axioms hold on generated models") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        unsigned pi = 1 + static_cast<unsigned>(seed % 3);
        KripkeModel m = gen_dense_model(seed, pi, 1 + seed % 6, {"p"},
                                        seed % 2 ? DenseFamily::witnessed : DenseFamily::reflexive);
        for (unsigned i = 0; i < pi; ++i) {
            std::string a = "[" + std::to_string(i) + "][" + std::to_string(i + 1) + "]p -> [" +
                            std::to_string(i) + "]p";
            std::string b = "<" + std::to_string(i) + ">p -> <" + std::to_string(i) + "><" +
                            std::to_string(i + 1) + ">p";
            for (std::size_t x = 0; x < m.size(); ++x) {
                CHECK(model_check(m, x, P(a, pi)));
                CHECK(model_check(m, x, P(b, pi)));
            }
        }
    }
}

TEST_CASE("window satisfaction") {
    KripkeModel m(2);
    m.add_edge(0, 0, 1);
    m.add_edge(1, 1, 1);
    m.set_atom("q", 1);
    Logic l = pi_logic(1);
    FormulaSet u = S({"[0]q", "<0>q"}, 1);
    WindowContext ctx{l, u, 0, 1, LambdaTag::depth, S({"~~q", "q"}, 1)};
    CHECK(sat_window(m, 0, Window(), ctx));
    Window w = Window::node({S({"~~q", "q"}, 1), S({"q"}, 1)}, {Window()});
    CHECK(is_window(w, ctx));
    CHECK(sat_window(m, 0, w, ctx));
    // the first row asks for p, false at every successor
    Window bad = Window::node({S({"~~q", "q", "p"}, 1), S({"q"}, 1)}, {Window()});
    CHECK_FALSE(sat_window(m, 0, bad, ctx));
}

TEST_CASE("model to window at the top level and on a reflexive upper level") {
    KripkeModel m(2);
    m.add_edge(0, 0, 1);
    m.add_edge(1, 1, 1);
    m.set_atom("p", 1);
    Logic l = pi_logic(1);
    FormulaSet top = S({"[1]p"}, 1);
    CHECK(build_window_from_model(m, 1, 1, top, {}, 1, 1, l).is_empty());
    FormulaSet u = S({"[0][1]p", "<0>p"}, 1);
    FormulaSet v0 = S({"~~p", "p", "[1]p"}, 1);
    Window w = build_window_from_model(m, 0, 1, u, v0, 0, u.depth(), l);
    WindowContext ctx{l, u, 0, u.depth(), LambdaTag::depth, v0};
    CHECK(is_window(w, ctx));
    CHECK(sat_window(m, 0, w, ctx));
    // the top row has nothing above it pushing boxed content down
    for (std::size_t i = 1; i + 1 < w.length(); ++i) CHECK(w.row(i) == w.row(i + 1));
    CHECK(w.row(w.length()).is_subset_of(w.row(w.length() - 1)));
}

TEST_CASE("model to window round trip on generated models") {
    std::mt19937_64 rng(9);
    int built = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        unsigned pi = 1 + static_cast<unsigned>(seed % 2);
        KripkeModel m = gen_dense_model(seed, pi, 2 + seed % 4, {"p", "q"},
                                        seed % 2 ? DenseFamily::witnessed : DenseFamily::reflexive);
        Logic l = pi_logic(pi);
        Evaluator ev(m, false);
        std::vector<unsigned> idx;
        for (unsigned k = 0; k <= pi; ++k) idx.push_back(k);
        Formula f = Formula::conj(Formula::box(0, random_small(rng, idx, 1, 5)), random_small(rng, idx, 2, 7));
        for (std::size_t x = 0; x < m.size(); ++x) {
            FormulaSet u = truth_ccs(ev, FormulaSet{f, Formula::neg(f)}, x);
            if (u.depth() == 0 || m.successors(0, x).empty()) continue;
            std::size_t y0 = m.successors(0, x).front();
            FormulaSet v0 = truth_ccs(ev, box_minus(0, u), y0);
            Window w = build_window_from_model(m, x, y0, u, v0, 0, u.depth(), l);
            WindowContext ctx{l, u, 0, u.depth(), LambdaTag::depth, v0};
            CHECK(is_window(w, ctx));
            CHECK(sat_window(m, x, w, ctx));
            if (!w.is_empty())
                for (std::size_t i = 1; i <= w.length(); ++i) CHECK(is_ccs(w.row(i), row_seed(w, i, 0, u, l)));
            ++built;
        }
    }
    CHECK(built > 100);
}

TEST_CASE("bounded model search") {
    SearchOptions opt;
    opt.pi = 1;
    opt.max_size = 3;
    auto one = bounded_model_search(P("p", 1), opt);
    REQUIRE(one);
    CHECK(one->first.size() == 1);
    CHECK_FALSE(bounded_model_search(P("bot", 1), opt));
    Formula f = P("~([0]p -> [0][1]p)", 1);
    auto cm = bounded_model_search(f, opt);
    REQUIRE(cm);
    CHECK(model_check(cm->first, cm->second, f));
    CHECK(is_dense(cm->first, 1).dense());
    SearchOptions mono = opt;
    mono.mono = true;
    Formula g = M("~(<><>p -> <>p)");
    auto cm2 = bounded_model_search(g, mono);
    REQUIRE(cm2);
    CHECK(model_check(cm2->first, cm2->second, g, true));
    CHECK(is_dense(cm2->first, 1, true).dense());
    SearchOptions big = opt;
    big.max_size = 7;
    CHECK_THROWS(bounded_model_search(f, big));
}

TEST_CASE("disjoint union") {
    CHECK_THROWS(disjoint_union({}));
    KripkeModel a = gen_dense_model(1, 1, 3), b = gen_dense_model(2, 1, 2, {"p", "q", "r"}, DenseFamily::witnessed);
    KripkeModel u = disjoint_union({a, b});
    CHECK(u.size() == 5);
    CHECK(is_dense(u, 1).dense());
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
        Formula f = random_small(rng, {0, 1}, 2, 8);
        for (std::size_t x = 0; x < a.size(); ++x) CHECK(model_check(a, x, f) == model_check(u, x, f));
        for (std::size_t x = 0; x < b.size(); ++x)
            CHECK(model_check(b, x, f) == model_check(u, a.size() + x, f));
    }
}

}
