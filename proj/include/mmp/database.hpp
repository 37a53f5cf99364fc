#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mmp {

using SymbolId = std::int32_t;
using StatementId = std::int32_t;

inline constexpr SymbolId kNoSymbol = -1;
inline constexpr StatementId kNoStatement = -1;

/// Raised for malformed Metamath input. `line()` is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

enum class StatementKind { constant, variable, floating, essential, disjoint, axiom, proposition };

/// Unordered pair of variables stored with the smaller id first.
struct VarPair {
    SymbolId first = kNoSymbol;
    SymbolId second = kNoSymbol;

    static VarPair of(SymbolId a, SymbolId b) { return a < b ? VarPair{a, b} : VarPair{b, a}; }
    friend bool operator==(const VarPair&, const VarPair&) = default;
    friend auto operator<=>(const VarPair&, const VarPair&) = default;
};

struct Statement {
    std::string label;  // empty for $c, $v and $d
    StatementKind kind = StatementKind::constant;
    SymbolId typecode = kNoSymbol;
    std::vector<SymbolId> body;  // symbols after the typecode ($c/$v/$d: declared symbols)
    std::vector<std::string> proof;
    int line = 0;
    int depth = 0;  // scope nesting, 0 for the outermost scope

    // Assertions only.
    std::vector<StatementId> mandatory;      // mandatory $f/$e hypotheses in database order
    std::vector<VarPair> mandatory_dv;       // $d pairs restricted to mandatory variables
    std::vector<StatementId> active_floats;  // every $f in scope, database order
    std::vector<VarPair> active_dv;          // every $d pair in scope, sorted

    bool is_assertion() const { return kind == StatementKind::axiom || kind == StatementKind::proposition; }
    bool is_hypothesis() const { return kind == StatementKind::floating || kind == StatementKind::essential; }
    bool compressed() const { return !proof.empty() && proof.front() == "("; }
};

/// Parsed Metamath database. Immutable after construction; safe to share across threads.
class Database {
public:
    static Database parse(std::string_view source);
    static Database load(const std::filesystem::path& path);

    std::span<const Statement> statements() const { return statements_; }
    const Statement& operator[](StatementId id) const { return statements_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return statements_.size(); }

    std::optional<StatementId> find(std::string_view label) const;
    const std::string& label(StatementId id) const { return (*this)[id].label; }

    std::optional<SymbolId> symbol(std::string_view name) const;
    const std::string& name(SymbolId id) const { return symbols_.at(static_cast<std::size_t>(id)); }
    std::size_t symbol_count() const { return symbols_.size(); }
    bool is_variable(SymbolId id) const { return is_var_.at(static_cast<std::size_t>(id)); }

    /// Typecode of propositions that carry proofs ("|-" in set.mm).
    SymbolId provable_typecode() const { return provable_; }

    /// Every assertion in the database whose typecode is the provable one.
    std::vector<StatementId> provable_assertions() const;

    /// Whether hypothesis `hyp` is in scope for assertion `at`.
    bool hypothesis_active(StatementId hyp, StatementId at) const;

    /// Re-serialize the supported subset. Comments are not preserved.
    std::string serialize() const;

    std::string render(SymbolId typecode, std::span<const SymbolId> body) const;

private:
    friend class DatabaseBuilder;

    std::vector<Statement> statements_;
    std::unordered_map<std::string, StatementId> labels_;
    std::vector<std::string> symbols_;
    std::vector<bool> is_var_;
    std::unordered_map<std::string, SymbolId> symbol_index_;
    // scope extent of each hypothesis: [declared, closed) in statement positions
    std::unordered_map<StatementId, StatementId> hyp_scope_end_;
    std::vector<std::int32_t> layout_;  // statement ids interleaved with kOpen/kClose markers
    SymbolId provable_ = kNoSymbol;
};

/// Expand a proposition's proof into a flat reverse-Polish label list.
/// Compressed proofs are decoded and Z back-references replayed in full.
std::vector<StatementId> decompress_proof(const Statement& prop, const Database& db);

}  // namespace mmp
