#include "doctest.h"

#include <set>

#include <filesystem>

#include "mmp/tokens.hpp"
#include "support.hpp"

using namespace mmp;

namespace {

struct Toy {
    std::unique_ptr<Theory> theory = testing::toy();
    TokenVocabulary vocab = TokenVocabulary::build(theory->grammar());
    const Database& db = theory->db();

    ParseTree e(std::string_view text) { return testing::expr(*theory, text, "ax-17"); }
    SymbolId sym(std::string_view s) { return *db.symbol(s); }
};

}  // namespace

TEST_CASE("vocabulary layout: specials, constructors, dummies") {
    Toy t;
    CHECK(t.vocab.name(kEOH) == "<EOH>");
    CHECK(t.vocab.name(kEOS) == "<EOS>");
    CHECK(t.vocab.name(kSTART) == "<START>");
    CHECK(t.vocab.name(kUV) == "<UV>");
    CHECK(t.vocab.name(kTARGET) == "<TARGET>");
    CHECK(t.vocab.name(5) == "wn");
    CHECK(t.vocab.constructor("wi") == 6);
    CHECK(t.vocab.constructor("wph") == -1);
    // wff: ax-2 has three wff variables; set: ax-17 has one.
    CHECK(t.vocab.dummy_count("wff") == 3 + 2);
    CHECK(t.vocab.dummy_count("set") == 1 + 2);
    CHECK(t.vocab.dummy_count("class") == 0 + 2);
    CHECK(t.vocab.size() == 5 + 8 + 5 + 3 + 2);
    TokenId w2 = t.vocab.dummy("wff", 2);
    CHECK(t.vocab.is_dummy(w2));
    CHECK(t.vocab.dummy_info(w2) == std::pair<std::string, int>{"wff", 2});
    CHECK_FALSE(t.vocab.is_dummy(t.vocab.constructor("wi")));
    CHECK_THROWS_AS(t.vocab.dummy_info(kEOS), TokenError);
}

TEST_CASE("vocabulary survives the text file round trip") {
    Toy t;
    auto path = std::filesystem::temp_directory_path() / "mmp_vocab_test.txt";
    t.vocab.write(path);
    auto back = TokenVocabulary::read(path);
    std::filesystem::remove(path);
    CHECK(back.text() == t.vocab.text());
    CHECK(back.hash() == t.vocab.hash());
    CHECK(back.dummy_count("wff") == t.vocab.dummy_count("wff"));
    CHECK_THROWS_AS(TokenVocabulary::from_text("wi\nwn\n"), TokenError);
    CHECK_THROWS_AS(TokenVocabulary::from_text("<EOH>\n<EOS>\n<START>\n<UV>\n<TARGET>\nwi\nwi\n"), TokenError);
}

TEST_CASE("a single tree tokenizes in pre-order") {
    Toy t;
    TokenId w1 = t.vocab.dummy("wff", 1), w2 = t.vocab.dummy("wff", 2);
    Renaming ren{{t.sym("ph"), w1}, {t.sym("ps"), w2}};
    auto seq = tokenize({{t.e("wff ( ph -> ps )")}}, ren, t.vocab, t.db);
    CHECK(seq.tokens == std::vector<TokenId>{t.vocab.constructor("wi"), w1, w2});
    REQUIRE(seq.features.size() == 3);
    CHECK(seq.features[0] == TokenFeatures{0, 2, 0, 0});
    CHECK(seq.features[1] == TokenFeatures{1, 0, 2, 0});
    CHECK(seq.features[2] == TokenFeatures{1, 0, 2, 1});
}

TEST_CASE("hypotheses are separated by EOH and groups by EOS") {
    Toy t;
    auto h1 = t.e("wff ph"), h2 = t.e("wff ( ph -> ps )"), a = t.e("wff ps");
    auto ren = canonical_renaming(occurring_variables({{h1, h2}, {a}}), t.vocab, t.db);
    auto seq = tokenize({{h1, h2}, {a}}, ren, t.vocab, t.db);
    TokenId w1 = t.vocab.dummy("wff", 1), w2 = t.vocab.dummy("wff", 2);
    CHECK(seq.tokens == std::vector<TokenId>{w1, kEOH, t.vocab.constructor("wi"), w1, w2, kEOS, w2});
    CHECK(seq.features[1] == TokenFeatures{0, 0, 0, 0});
    CHECK(seq.features[5] == TokenFeatures{0, 0, 0, 0});
    CHECK(seq.features.size() == seq.tokens.size());

    SUBCASE("an empty hypothesis group still contributes its EOS and no EOH") {
        auto only = tokenize({{}, {a}}, ren, t.vocab, t.db);
        CHECK(only.tokens == std::vector<TokenId>{kEOS, w2});
    }
}

TEST_CASE("tokenize rejects missing and colliding dummies") {
    Toy t;
    auto tree = t.e("wff ( ph -> ps )");
    TokenId w1 = t.vocab.dummy("wff", 1);
    CHECK_THROWS_AS(tokenize({{tree}}, Renaming{{t.sym("ph"), w1}}, t.vocab, t.db), TokenError);
    CHECK_THROWS_AS(tokenize({{tree}}, Renaming{{t.sym("ph"), w1}, {t.sym("ps"), w1}}, t.vocab, t.db), TokenError);
    // Special markers may be shared.
    CHECK_NOTHROW(tokenize({{tree}}, Renaming{{t.sym("ph"), kUV}, {t.sym("ps"), kUV}}, t.vocab, t.db));
}

TEST_CASE("random renaming uses distinct dummies of the right type and depends on the seed") {
    Toy t;
    auto tree = t.e("wff ( A. x ph -> ( ps -> x = y ) )");
    auto vars = occurring_variables({{tree}});
    REQUIRE(vars.size() == 4);
    std::set<std::vector<TokenId>> seen;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        auto ren = random_renaming(vars, t.vocab, t.db, rng);
        std::set<TokenId> distinct;
        for (auto& [v, type] : vars) {
            TokenId tok = ren.at(v);
            distinct.insert(tok);
            CHECK(t.vocab.dummy_info(tok).first == t.db.name(type));
        }
        CHECK(distinct.size() == 4);
        auto seq = tokenize({{tree}}, ren, t.vocab, t.db);
        CHECK(seq.tokens.size() == tree.size());
        seen.insert(seq.tokens);
    }
    CHECK(seen.size() > 1);
}

TEST_CASE("tokenization is injective for a fixed renaming") {
    Toy t;
    std::vector<ParseTree> trees{t.e("wff ( ph -> ( ps -> ph ) )"), t.e("wff ( ( ph -> ps ) -> ph )"),
                                 t.e("wff ( ph -> ps )"), t.e("wff -. ( ph -> ps )"), t.e("wff ( -. ph -> ps )")};
    Renaming ren{{t.sym("ph"), t.vocab.dummy("wff", 1)}, {t.sym("ps"), t.vocab.dummy("wff", 2)}};
    std::set<std::vector<TokenId>> seqs;
    for (auto& tr : trees) seqs.insert(tokenize({{tr}}, ren, t.vocab, t.db).tokens);
    CHECK(seqs.size() == trees.size());
}

TEST_CASE("detokenize inverts tokenize") {
    Toy t;
    auto tree = t.e("wff ( A. x ph -> -. x e. y )");
    auto vars = occurring_variables({{tree}});
    auto ren = canonical_renaming(vars, t.vocab, t.db);
    std::unordered_map<TokenId, ParseTree> inverse;
    for (auto& [v, type] : vars) inverse.emplace(ren.at(v), ParseTree::variable(v, type));
    auto seq = tokenize({{tree}}, ren, t.vocab, t.db);
    CHECK(detokenize(seq.tokens, inverse, t.vocab, t.theory->grammar()) == tree);

    std::vector<TokenId> truncated(seq.tokens.begin(), seq.tokens.end() - 1);
    CHECK_THROWS_AS(detokenize(truncated, inverse, t.vocab, t.theory->grammar()), TokenError);
    auto extra = seq.tokens;
    extra.push_back(seq.tokens.back());
    CHECK_THROWS_AS(detokenize(extra, inverse, t.vocab, t.theory->grammar()), TokenError);
    CHECK_THROWS_AS(detokenize(std::vector<TokenId>{kUV}, inverse, t.vocab, t.theory->grammar()), TokenError);
    // wi applied to a set variable is ill-typed.
    std::vector<TokenId> ill{t.vocab.constructor("wi"), ren.at(t.sym("x")), ren.at(t.sym("ph"))};
    CHECK_THROWS_AS(detokenize(ill, inverse, t.vocab, t.theory->grammar()), TokenError);
}
