#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmp/database.hpp"
#include "mmp/grammar.hpp"

namespace mmp {

class FrameError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TypedVar {
    SymbolId var = kNoSymbol;
    SymbolId typecode = kNoSymbol;
    StatementId float_label = kNoStatement;
};

/// A theorem of the provable type: a_T, e_T, f_T and d_T.
struct TheoremFrame {
    StatementId label = kNoStatement;
    ParseTree assertion;
    std::vector<ParseTree> hypotheses;
    std::vector<StatementId> hypothesis_labels;
    std::vector<TypedVar> free_vars;  // mandatory $f order
    std::vector<VarPair> disjoint;    // sorted, irreflexive
    bool is_axiom = false;

    std::vector<SymbolId> constrained;    // occur in the assertion
    std::vector<SymbolId> unconstrained;  // occur only in hypotheses

    StatementId position() const { return label; }
    bool is_constrained(SymbolId v) const;
    const TypedVar* find_var(SymbolId v) const;
};

/// A proposition viewed as the goal of a search. Beyond the frame it carries
/// every variable and disjointness pair in scope, since proofs may use
/// variables outside the mandatory set.
struct Context {
    TheoremFrame frame;
    std::vector<TypedVar> available_vars;  // all active $f, database order
    std::vector<VarPair> disjoint;         // all active $d pairs, sorted

    StatementId label() const { return frame.label; }
    StatementId position() const { return frame.label; }
    const ParseTree& assertion() const { return frame.assertion; }
    const std::vector<ParseTree>& hypotheses() const { return frame.hypotheses; }

    bool is_disjoint(SymbolId a, SymbolId b) const;
    const TypedVar* find_var(SymbolId v) const;
    /// Index into hypotheses of a member equal to `t`, or -1.
    int hypothesis_index(const ParseTree& t) const;
};

TheoremFrame frame_of(StatementId label, const Database& db, const Grammar& grammar);
TheoremFrame frame_of(std::string_view label, const Database& db, const Grammar& grammar);

Context context_of(StatementId label, const Database& db, const Grammar& grammar);

}  // namespace mmp
