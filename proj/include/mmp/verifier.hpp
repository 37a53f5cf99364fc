#pragma once

#include <string>
#include <vector>

#include "mmp/database.hpp"
#include "mmp/frame.hpp"
#include "mmp/unify.hpp"

namespace mmp {

class Theory;

/// A proof tree with each red node and its single blue child merged: a leaf
/// carries the index of the context hypothesis it names; an inner node
/// carries the applied theorem, its full substitution and one child per
/// hypothesis of that theorem.
struct ProofNode {
    ParseTree expression;
    StatementId theorem = kNoStatement;
    int hypothesis = -1;  // index into the context hypotheses for leaves
    Substitution substitution;
    std::vector<ProofNode> children;

    bool is_leaf() const { return theorem == kNoStatement; }
    /// Number of red nodes.
    std::size_t size() const;
};

struct VerifyReport {
    bool ok = true;
    std::string message;
    std::vector<int> path;  // child indices from the root to the failing node

    explicit operator bool() const { return ok; }
};

VerifyReport verify_proof_tree(const ProofNode& root, const Context& ctx, const Theory& theory);

/// Symbol-level stack machine over a flat label list: the trusted kernel.
/// Depends on the database only, not on the grammar.
VerifyReport verify_rpn_proof(const std::vector<StatementId>& labels, const Statement& prop, StatementId prop_id,
                              const Database& db);
/// Decompress and verify a proposition's own proof.
VerifyReport verify_proposition(StatementId prop_id, const Database& db);

/// Proof tree of a proposition from its verified RPN proof. Steps of non-provable
/// typecode are folded into the substitutions.
ProofNode tree_from_rpn(const std::vector<StatementId>& labels, const Context& ctx, const Theory& theory);

/// RPN labels for a verified proof tree, uncompressed. Variables are
/// introduced through their active $f hypotheses in the context's scope.
std::vector<StatementId> emit_rpn(const ProofNode& root, const Context& ctx, const Theory& theory);
/// RPN labels that build `t` from its constructors.
void emit_syntax(const ParseTree& t, const Context& ctx, const Theory& theory, std::vector<StatementId>& out);

/// Result of writing a found proof as a new `$p` statement.
struct ProofBlock {
    std::string label;  // label of the new proposition
    std::string text;   // `${ ... $}` block to append to the database source
};

/// Render a proof of `ctx` as a self-contained block appended after the
/// whole database. The new proposition restates the context's hypotheses
/// and disjointness conditions under fresh labels.
ProofBlock write_proof_block(const ProofNode& root, const Context& ctx, const Theory& theory);

/// Append the block to `source`, re-parse it, and verify the new proposition.
VerifyReport recheck_proof_block(const std::string& source, const ProofBlock& block);

}  // namespace mmp
