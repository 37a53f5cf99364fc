#include "doctest.h"

#include "mmp/grammar.hpp"
#include "support.hpp"

using namespace mmp;

namespace {

std::vector<SymbolId> symbols(const Database& db, std::string_view text) {
    std::vector<SymbolId> out;
    std::size_t i = 0;
    while (i < text.size()) {
        auto j = text.find(' ', i);
        if (j == std::string_view::npos) j = text.size();
        if (j > i) out.push_back(db.symbol(text.substr(i, j - i)).value());
        i = j + 1;
    }
    return out;
}

}  // namespace

TEST_CASE("constructor axioms become productions and nothing else does") {
    auto theory = testing::toy();
    const auto& g = theory->grammar();
    const auto& db = theory->db();
    std::vector<std::string> labels;
    for (auto& p : g.productions()) labels.push_back(db.label(p.label));
    CHECK(labels == std::vector<std::string>{"wn", "wi", "wb", "wa", "wal", "cv", "wceq", "wcel"});
    CHECK(g.productions_of(*db.symbol("wff")).size() == 7);
    CHECK(g.productions_of(*db.symbol("class")).size() == 1);
    CHECK_FALSE(g.is_constructor(*db.find("ax-1")));
    CHECK(db.name(g.logical_typecode()) == "wff");
}

TEST_CASE("a proved wff statement is not a production") {
    auto theory = Theory::parse(R"(
      $c wff |- -. $. $v p $. wp $f wff p $.
      wn $a wff -. p $.
      ax $a |- p $.
      dn $p wff -. -. p $= wp wn wn $.
    )");
    CHECK(theory->grammar().productions().size() == 1);
    CHECK_FALSE(theory->grammar().is_constructor(*theory->db().find("dn")));
}

TEST_CASE("parse builds the expected trees") {
    auto theory = testing::toy();
    const auto& g = theory->grammar();
    const auto& db = theory->db();
    auto vars = scope_typing(db, *db.find("ax-17"));
    SymbolId ph = *db.symbol("ph"), ps = *db.symbol("ps"), wff = *db.symbol("wff");

    SUBCASE("implication") {
        ParseTree t = g.parse(symbols(db, "wff ( ph -> ps )"), vars);
        CHECK(db.label(t.constructor()) == "wi");
        REQUIRE(t.children().size() == 2);
        CHECK(t.child(0) == ParseTree::variable(ph, wff));
        CHECK(t.child(1) == ParseTree::variable(ps, wff));
    }
    SUBCASE("a bare variable") {
        ParseTree t = g.parse(symbols(db, "wff ph"), vars);
        CHECK(t.is_variable());
        CHECK(t.var() == ph);
    }
    SUBCASE("children follow body order") {
        ParseTree t = g.parse(symbols(db, "wff A. x ph"), vars);
        CHECK(db.label(t.constructor()) == "wal");
        CHECK(t.child(0).var() == *db.symbol("x"));
        CHECK(t.child(1).var() == ph);
    }
    SUBCASE("nested and typed") {
        ParseTree t = g.parse(symbols(db, "wff ( -. ph -> x = y )"), vars);
        CHECK(g.to_string(t) == "wff ( -. ph -> x = y )");
        CHECK(db.label(t.child(1).constructor()) == "wceq");
        CHECK(db.label(t.child(1).child(0).constructor()) == "cv");
        CHECK(t.size() == 8);
        CHECK(t.depth() == 3);
    }
    SUBCASE("truncated input") {
        try {
            g.parse(symbols(db, "wff ( ph ->"), vars);
            FAIL("expected an error");
        } catch (const GrammarError& e) {
            CHECK(e.kind() == GrammarError::Kind::no_parse);
        }
    }
    SUBCASE("variable of the wrong type") { CHECK_THROWS_AS(g.parse(symbols(db, "wff x"), vars), GrammarError); }
}

TEST_CASE("render is the inverse of parse") {
    auto theory = testing::toy();
    const auto& g = theory->grammar();
    const auto& db = theory->db();
    auto vars = scope_typing(db, *db.find("ax-17"));
    SymbolId wff = *db.symbol("wff");
    ParseTree ph = ParseTree::variable(*db.symbol("ph"), wff);
    ParseTree ps = ParseTree::variable(*db.symbol("ps"), wff);
    ParseTree wi = ParseTree::apply(*db.find("wi"), wff, {ph, ps});
    ParseTree nested = ParseTree::apply(*db.find("wi"), wff, {ParseTree::apply(*db.find("wn"), wff, {ph}), ps});
    CHECK(g.to_string(wi) == "wff ( ph -> ps )");
    CHECK(g.to_string(ph) == "wff ph");
    CHECK(g.to_string(nested) == "wff ( -. ph -> ps )");
    for (auto& t : {wi, ph, nested}) CHECK(g.parse(g.render(t), vars) == t);
}

TEST_CASE("ambiguity is an error, never resolved silently") {
    auto theory = Theory::parse(R"(
      $c wff |- * $. $v p $. wp $f wff p $.
      w1 $a wff * p $.
      w2 $a wff * * p $.
      ax $a |- p $.
    )");
    const auto& db = theory->db();
    auto vars = scope_typing(db, *db.find("ax"));
    CHECK_NOTHROW(theory->grammar().parse(symbols(db, "wff * p"), vars));
    try {
        theory->grammar().parse(symbols(db, "wff * * p"), vars);
        FAIL("expected an ambiguity error");
    } catch (const GrammarError& e) {
        CHECK(e.kind() == GrammarError::Kind::ambiguous);
    }
}

TEST_CASE("left-recursive productions are rejected") {
    CHECK_THROWS_AS(Theory::parse(R"(
      $c wff |- + $. $v p q $. wp $f wff p $. wq $f wff q $.
      wo $a wff p + q $.
      ax $a |- p $.
    )"),
                    GrammarError);
}

TEST_CASE("equal trees hash equally; different trees compare unequal") {
    auto theory = testing::toy();
    const auto& db = theory->db();
    auto a = testing::expr(*theory, "wff ( ph -> ( ps -> ph ) )", "ax-1");
    auto b = testing::expr(*theory, "wff ( ph -> ( ps -> ph ) )", "ax-1");
    auto c = testing::expr(*theory, "wff ( ps -> ( ps -> ph ) )", "ax-1");
    CHECK(a == b);
    CHECK(a.hash() == b.hash());
    CHECK_FALSE(a == c);
    CHECK(a.variables() == std::vector<SymbolId>{*db.symbol("ph"), *db.symbol("ps")});
    CHECK(a.contains_variable(*db.symbol("ps")));
    CHECK_FALSE(a.contains_variable(*db.symbol("ch")));
}

TEST_CASE("every fixture statement parses and renders back") {
    const auto& theory = testing::fixture();
    const auto& db = theory.db();
    const auto& g = theory.grammar();
    std::size_t checked = 0;
    for (auto id : db.provable_assertions()) {
        const Statement& st = db[id];
        ParseTree t = g.parse_statement(st, scope_typing(db, id));
        std::vector<SymbolId> body;
        g.render_body(t, body);
        CHECK(body == st.body);
        ++checked;
    }
    CHECK(checked > 3000);
}
