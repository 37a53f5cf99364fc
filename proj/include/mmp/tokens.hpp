#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mmp/grammar.hpp"

namespace mmp {

using TokenId = std::int32_t;

/// Special tokens always occupy the first five ids.
enum SpecialToken : TokenId { kEOH = 0, kEOS = 1, kSTART = 2, kUV = 3, kTARGET = 4 };
inline constexpr int kSpecialCount = 5;

class TokenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// depth, degree, parent degree, position within parent
using TokenFeatures = std::array<int, 4>;

struct TokenSequence {
    std::vector<TokenId> tokens;
    std::vector<TokenFeatures> features;
};

/// Token ids shared with the model service. The file form is one token
/// per line; the line number (from 0) is the id.
///
/// Names: specials are `<EOH>`, `<EOS>`, `<START>`, `<UV>`, `<TARGET>`;
/// constructors use their axiom label; dummy variables are `typecode#k`
/// with k counting from 1.
class TokenVocabulary {
public:
    TokenVocabulary() = default;

    /// Constructors in database order, then for each typecode (in symbol order)
    /// as many dummies as `dummy_counts` asks for.
    static TokenVocabulary build(const Grammar& grammar, const std::map<SymbolId, int>& dummy_counts);
    /// Dummy counts derived from the grammar's database: the largest number of
    /// free variables of each typecode over all provable assertions, plus `slack`.
    static TokenVocabulary build(const Grammar& grammar, int slack = 2);

    static TokenVocabulary read(const std::filesystem::path& path);
    static TokenVocabulary from_text(std::string_view text);
    std::string text() const;
    void write(const std::filesystem::path& path) const;
    /// SHA-256 of text().
    std::string hash() const;

    std::size_t size() const { return names_.size(); }
    const std::string& name(TokenId id) const { return names_.at(static_cast<std::size_t>(id)); }
    /// -1 if absent.
    TokenId id(std::string_view name) const;

    TokenId constructor(std::string_view label) const;
    TokenId dummy(std::string_view typecode, int k) const;  // k from 1
    int dummy_count(std::string_view typecode) const;
    bool is_dummy(TokenId id) const;
    /// Typecode name and index of a dummy token.
    std::pair<std::string, int> dummy_info(TokenId id) const;

private:
    void index();

    std::vector<std::string> names_;
    std::unordered_map<std::string, TokenId> ids_;
    std::map<std::string, int, std::less<>> dummy_counts_;
};

/// Variable symbol to token id. Values are dummies or the UV/TARGET specials.
using Renaming = std::unordered_map<SymbolId, TokenId>;

/// Pre-order tokens of each tree. Trees within a group are separated by EOH;
/// consecutive groups by EOS (an empty group still contributes its EOS).
/// Throws TokenError if a variable is missing from `renaming` or two
/// variables share a dummy token.
TokenSequence tokenize(const std::vector<std::vector<ParseTree>>& groups, const Renaming& renaming,
                       const TokenVocabulary& vocab, const Database& db);

/// Variables of the trees in first-occurrence order, with typecodes.
std::vector<std::pair<SymbolId, SymbolId>> occurring_variables(const std::vector<std::vector<ParseTree>>& groups);

/// Dummies assigned by first occurrence: the k-th distinct variable of a
/// typecode gets `typecode#k`.
Renaming canonical_renaming(const std::vector<std::pair<SymbolId, SymbolId>>& vars, const TokenVocabulary& vocab,
                            const Database& db);

/// Distinct dummies of the right typecode drawn uniformly from the supply.
Renaming random_renaming(const std::vector<std::pair<SymbolId, SymbolId>>& vars, const TokenVocabulary& vocab,
                         const Database& db, std::mt19937_64& rng);

/// Inverse of tokenize for a single tree. Dummies are mapped back through
/// `inverse`; specials are rejected.
ParseTree detokenize(std::span<const TokenId> tokens, const std::unordered_map<TokenId, ParseTree>& inverse,
                     const TokenVocabulary& vocab, const Grammar& grammar);

}  // namespace mmp
