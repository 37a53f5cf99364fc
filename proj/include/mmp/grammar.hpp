#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmp/database.hpp"

namespace mmp {

/// Immutable expression tree over constructor axioms and variables.
///
/// Nodes are shared; copying a ParseTree is cheap. Equality is structural
/// (labels, typecodes, children) with a cached hash as a fast reject.
class ParseTree {
public:
    ParseTree() = default;

    static ParseTree variable(SymbolId var, SymbolId typecode);
    static ParseTree apply(StatementId constructor, SymbolId typecode, std::vector<ParseTree> children);

    bool empty() const { return node_ == nullptr; }
    bool is_variable() const { return node_->is_var; }
    /// Variable symbol for leaves, constructor statement id otherwise.
    std::int32_t head() const { return node_->head; }
    SymbolId var() const { return node_->head; }
    StatementId constructor() const { return node_->head; }
    SymbolId typecode() const { return node_->typecode; }
    std::span<const ParseTree> children() const { return node_->children; }
    const ParseTree& child(std::size_t i) const { return node_->children[i]; }
    std::size_t hash() const { return node_->hash; }
    /// Node count.
    std::size_t size() const { return node_->size; }
    std::size_t depth() const { return node_->depth; }

    /// Whether the two handles point to the same node.
    bool same_node(const ParseTree& other) const { return node_ == other.node_; }

    friend bool operator==(const ParseTree& a, const ParseTree& b);

    /// Variables in first-occurrence pre-order.
    std::vector<SymbolId> variables() const;
    bool contains_variable(SymbolId v) const;

private:
    struct Node {
        std::int32_t head;
        SymbolId typecode;
        bool is_var;
        std::vector<ParseTree> children;
        std::size_t hash;
        std::size_t size;
        std::size_t depth;
    };
    std::shared_ptr<const Node> node_;
};

struct ParseTreeHash {
    std::size_t operator()(const ParseTree& t) const { return t.hash(); }
};

/// Variable symbol to typecode, e.g. the $f hypotheses in scope.
using VariableTyping = std::unordered_map<SymbolId, SymbolId>;

class GrammarError : public std::runtime_error {
public:
    enum class Kind { no_parse, ambiguous, unsupported };
    GrammarError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// A constructor axiom viewed as a production `typecode -> body`.
struct Production {
    StatementId label = kNoStatement;
    SymbolId typecode = kNoSymbol;
    std::vector<SymbolId> body;        // constants and slot variables, as in the axiom
    std::vector<int> slot_at;          // per body symbol: slot index or -1 for a constant
    std::vector<SymbolId> slot_vars;   // slot variables in body order
    std::vector<SymbolId> slot_types;  // their typecodes
    std::vector<int> mandatory_slots;  // slot index of each mandatory $f, in database order
};

/// Context-free grammar formed by the non-provable axioms of a database.
class Grammar {
public:
    Grammar() = default;
    explicit Grammar(const Database& db);

    std::span<const Production> productions() const { return productions_; }
    /// Productions of one typecode, in database order.
    std::vector<const Production*> productions_of(SymbolId typecode) const;
    const Production* production(StatementId label) const;
    bool is_constructor(StatementId label) const { return production(label) != nullptr; }

    /// Typecodes that head at least one production or floating hypothesis.
    std::span<const SymbolId> typecodes() const { return typecodes_; }
    /// Typecode that provable statements assert ("wff" in set.mm).
    SymbolId logical_typecode() const { return logical_; }

    /// Parse `symbols` (typecode first) into its unique parse tree.
    /// Throws GrammarError on no parse or on more than one parse.
    ParseTree parse(std::span<const SymbolId> symbols, const VariableTyping& vars) const;
    /// Parse `body` as an expression of the given typecode.
    ParseTree parse_as(SymbolId typecode, std::span<const SymbolId> body, const VariableTyping& vars) const;

    /// Symbol string of a tree, typecode first.
    std::vector<SymbolId> render(const ParseTree& t) const;
    /// Body only.
    void render_body(const ParseTree& t, std::vector<SymbolId>& out) const;
    std::string to_string(const ParseTree& t) const;

    /// Statements whose body parses when read with the typecode substituted,
    /// e.g. "|- ( ph -> ps )" read as "wff ( ph -> ps )".
    ParseTree parse_statement(const Statement& st, const VariableTyping& vars) const;

    const Database& database() const { return *db_; }

private:
    const Database* db_ = nullptr;
    std::vector<Production> productions_;
    std::unordered_map<StatementId, std::size_t> by_label_;
    std::map<SymbolId, std::vector<std::size_t>> by_type_;
    std::vector<SymbolId> typecodes_;
    SymbolId logical_ = kNoSymbol;
};

/// Typing of every $f hypothesis in scope of an assertion.
VariableTyping scope_typing(const Database& db, StatementId at);

}  // namespace mmp
