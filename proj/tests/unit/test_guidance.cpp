#include "doctest.h"

#include <numeric>

#include "mmp/guidance.hpp"
#include "support.hpp"

using namespace mmp;

namespace {

const ViableTheorem& pick(const std::vector<ViableTheorem>& v, const Database& db, std::string_view label) {
    for (auto& t : v)
        if (db.label(t.frame->label) == label) return t;
    throw std::runtime_error("not viable: " + std::string(label));
}

double sum(const std::vector<double>& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

}  // namespace

TEST_CASE("usage frequencies count theorem references in proofs") {
    auto theory = testing::toy();
    const auto& db = theory->db();
    std::vector<StatementId> props{*db.find("mp2b"), *db.find("a1i")};
    auto f = usage_frequencies(*theory, props);
    CHECK(f.at(*db.find("ax-mp")) == 3);
    CHECK(f.at(*db.find("ax-1")) == 1);
    CHECK_FALSE(f.count(*db.find("wi")));
}

TEST_CASE("baseline relevance") {
    auto theory = testing::toy();
    const auto& db = theory->db();

    SUBCASE("frequencies 10 and 30 give a quarter and three quarters") {
        Context ctx = theory->context("id");
        auto a = testing::expr(*theory, "wff ( ph -> ( ps -> ph ) )", "id");
        auto all = viable_theorems(a, ctx, *theory);
        std::vector<ViableTheorem> two{pick(all, db, "ax-mp"), pick(all, db, "ax-1")};
        BaselineGuidance g(*theory, {{*db.find("ax-mp"), 10}, {*db.find("ax-1"), 30}});
        auto p = g.relevance(ctx, a, two);
        REQUIRE(p.size() == 2);
        CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("a single theorem gets probability one") {
        Context ctx = theory->context("id");
        auto all = viable_theorems(ctx.assertion(), ctx, *theory);
        std::vector<ViableTheorem> one{all.front()};
        BaselineGuidance g(*theory, {});
        CHECK(g.relevance(ctx, ctx.assertion(), one) == std::vector<double>{1.0});
    }
    SUBCASE("a hypothesis matching the context earns the bonus") {
        Context ctx = theory->context("mp2b");
        auto all = viable_theorems(ctx.assertion(), ctx, *theory);
        std::vector<ViableTheorem> two{pick(all, db, "ax-mp"), pick(all, db, "idi")};
        CHECK(BaselineGuidance::hypothesis_matches_context(two[0], ctx));
        CHECK_FALSE(BaselineGuidance::hypothesis_matches_context(two[1], ctx));
        BaselineGuidance g(*theory, {{*db.find("ax-mp"), 5}, {*db.find("idi"), 5}});
        auto p = g.relevance(ctx, ctx.assertion(), two);
        CHECK(p[0] > p[1]);
        CHECK(sum(p) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("baseline generation") {
    auto theory = testing::toy();
    const auto& db = theory->db();
    BaselineGuidance g(*theory, {});

    SUBCASE("no unconstrained variables: the forced substitution only") {
        Context ctx = theory->context("id");
        auto a = testing::expr(*theory, "wff ( ph -> ( ps -> ph ) )", "id");
        auto all = viable_theorems(a, ctx, *theory);
        const auto& ax1 = pick(all, db, "ax-1");
        auto r = g.generate(ctx, a, ax1, 5, 75);
        REQUIRE(r.candidates.size() == 1);
        CHECK(r.candidates[0].substitution == ax1.constrained);
        CHECK(r.candidates[0].probability == 1.0);
    }
    SUBCASE("width one gives the smallest candidate") {
        Context ctx = theory->context("mp2b");
        auto all = viable_theorems(ctx.assertion(), ctx, *theory);
        const auto& mp = pick(all, db, "ax-mp");
        auto r = g.generate(ctx, ctx.assertion(), mp, 1, 75);
        REQUIRE(r.candidates.size() == 1);
        CHECK(r.candidates[0].substitution.at(*db.symbol("ph")).size() == 1);
        CHECK(r.candidates[0].probability == 1.0);
    }
    SUBCASE("wider beams rank by size with probabilities proportional to 1/rank") {
        Context ctx = theory->context("mp2b");
        auto all = viable_theorems(ctx.assertion(), ctx, *theory);
        const auto& mp = pick(all, db, "ax-mp");
        auto r = g.generate(ctx, ctx.assertion(), mp, 5, 75);
        REQUIRE(r.candidates.size() == 5);
        for (std::size_t i = 1; i < r.candidates.size(); ++i) {
            CHECK(r.candidates[i - 1].substitution.at(*db.symbol("ph")).size() <=
                  r.candidates[i].substitution.at(*db.symbol("ph")).size());
            CHECK(r.candidates[i].probability * static_cast<double>(i + 1) ==
                  doctest::Approx(r.candidates[0].probability));
        }
        double total = 0;
        for (auto& c : r.candidates) {
            total += c.probability;
            CHECK(well_typed(c.substitution, *mp.frame, ctx));
            CHECK(check_disjoint(c.substitution, *mp.frame, ctx));
            CHECK(apply_substitution(mp.frame->assertion, c.substitution) == ctx.assertion());
        }
        CHECK(total == doctest::Approx(1.0));
    }
    SUBCASE("a token limit below every candidate reports the limit") {
        Context ctx = theory->context("mp2b");
        auto all = viable_theorems(ctx.assertion(), ctx, *theory);
        auto r = g.generate(ctx, ctx.assertion(), pick(all, db, "ax-mp"), 5, 0);
        CHECK(r.candidates.empty());
        CHECK(r.hit_token_limit);
    }
}

TEST_CASE("baseline generation with no image of the needed typecode is empty") {
    auto theory = Theory::parse(R"(
      $c wff |- class [ ] ( ) -> $. $v p q A $.
      wp $f wff p $. wq $f wff q $.
      wi $a wff ( p -> q ) $.
      ${
        cA $f class A $.
        wcl $a wff [ A ] $.
        ${ h $e |- [ A ] $. ax-c $a |- p $. $}
      $}
      t $p |- ( p -> p ) $= ? $.
    )");
    Context ctx = theory->context("t");
    auto viable = viable_theorems(ctx.assertion(), ctx, *theory);
    REQUIRE(viable.size() == 1);
    BaselineGuidance g(*theory, {});
    auto r = g.generate(ctx, ctx.assertion(), viable[0], 5, 75);
    CHECK(r.candidates.empty());
    CHECK_FALSE(r.hit_token_limit);
}

TEST_CASE("oracle guidance follows the known proof") {
    auto theory = testing::toy();
    const auto& db = theory->db();
    Context ctx = theory->context("mp2b");
    ProofNode proof = tree_from_rpn(decompress_proof(db[ctx.label()], db), ctx, *theory);
    OracleGuidance g(*theory, ctx, proof);

    auto viable = viable_theorems(ctx.assertion(), ctx, *theory);
    auto p = g.relevance(ctx, ctx.assertion(), viable);
    std::size_t best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    CHECK(db.label(viable[best].frame->label) == "ax-mp");
    CHECK(p[best] == doctest::Approx(1 - 1e-3));
    CHECK(sum(p) == doctest::Approx(1.0).epsilon(1e-12));

    auto r = g.generate(ctx, ctx.assertion(), viable[best], 5, 75);
    REQUIRE_FALSE(r.candidates.empty());
    CHECK(r.candidates[0].substitution == proof.substitution);
    for (std::size_t i = 1; i < r.candidates.size(); ++i) CHECK(r.candidates[i].probability < r.candidates[0].probability);

    auto off = testing::expr(*theory, "wff ( ch -> ch )", "mp2b");
    auto off_viable = viable_theorems(off, ctx, *theory);
    auto q = g.relevance(ctx, off, off_viable);
    for (auto x : q) CHECK(x == doctest::Approx(1.0 / static_cast<double>(q.size())));

    CHECK(g.payoff(ctx, ctx.assertion()) == 1.0);
    CHECK(g.payoff(ctx, proof.children[0].expression) == 1.0);
    CHECK(g.payoff(ctx, off) == doctest::Approx(0.1));
}

TEST_CASE("detours through a repeated expression are cut") {
    auto theory = testing::toy();
    const auto& db = theory->db();
    Context ctx = theory->context("idi");
    // |- ph from |- ph and |- ( ph -> ph ) by ax-mp is a detour around the leaf.
    ProofNode leaf;
    leaf.expression = ctx.assertion();
    leaf.hypothesis = 0;
    ProofNode detour;
    detour.expression = ctx.assertion();
    detour.theorem = *db.find("ax-mp");
    detour.substitution = {{*db.symbol("ph"), ctx.assertion()}, {*db.symbol("ps"), ctx.assertion()}};
    ProofNode impl;
    impl.expression = testing::expr(*theory, "wff ( ph -> ph )", "idi");
    detour.children = {leaf, impl};
    ProofNode cut = shortcut_detours(detour);
    CHECK(cut.is_leaf());
    CHECK(cut.hypothesis == 0);
}
