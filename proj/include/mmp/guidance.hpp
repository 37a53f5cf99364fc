#pragma once

#include <chrono>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmp/frame.hpp"
#include "mmp/unify.hpp"
#include "mmp/verifier.hpp"

namespace mmp {

class Theory;
class TokenVocabulary;

/// Raised by guidance implementations that cannot answer (network failure,
/// timeout, malformed reply). The search treats it as a soft failure.
class GuidanceError : public std::runtime_error {
public:
    enum class Kind { connection, protocol, timeout, remote };
    GuidanceError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct GeneratedSubstitution {
    Substitution substitution;  // complete: constrained and unconstrained variables
    double probability = 0;
};

struct GenerateResult {
    std::vector<GeneratedSubstitution> candidates;
    /// Set when candidates existed but every one exceeded the token limit.
    bool hit_token_limit = false;
};

/// The three queries a search asks of its guidance.
///
/// Implementations must be safe to call from several threads at once.
class GuidanceModel {
public:
    virtual ~GuidanceModel() = default;

    /// p_T for each viable theorem; sums to 1 over the list.
    virtual std::vector<double> relevance(const Context& ctx, const ParseTree& a,
                                          std::span<const ViableTheorem> viable) = 0;
    /// Complete substitutions for the unconstrained variables of `theorem`,
    /// most probable first.
    virtual GenerateResult generate(const Context& ctx, const ParseTree& a, const ViableTheorem& theorem,
                                    int beam_width, int token_limit) = 0;
    /// Estimated probability that `a` is provable in the context, in [0, 1].
    virtual double payoff(const Context& ctx, const ParseTree& a) = 0;

    virtual std::string kind() const = 0;
};

/// Usage counts of theorems in the proofs of the given propositions.
std::unordered_map<StatementId, double> usage_frequencies(const Theory& theory,
                                                          std::span<const StatementId> propositions);

/// Frequency-and-unification heuristics that need no trained model.
class BaselineGuidance : public GuidanceModel {
public:
    struct Options {
        double unseen_frequency = 0.5;  // score of a theorem absent from the frequency table
        double match_bonus = 1.0;       // multiplier bonus when a hypothesis matches e_C
        double payoff = 0.5;            // constant payoff estimate
        int per_variable_candidates = 48;
        int max_combinations = 20000;
    };

    BaselineGuidance(const Theory& theory, std::unordered_map<StatementId, double> frequencies);
    BaselineGuidance(const Theory& theory, std::unordered_map<StatementId, double> frequencies, Options options);

    std::vector<double> relevance(const Context& ctx, const ParseTree& a, std::span<const ViableTheorem> viable) override;
    GenerateResult generate(const Context& ctx, const ParseTree& a, const ViableTheorem& theorem, int beam_width,
                            int token_limit) override;
    double payoff(const Context& ctx, const ParseTree& a) override;
    std::string kind() const override { return "baseline"; }

    /// Whether some hypothesis of the theorem, under its constrained
    /// substitution, matches a member of e_C.
    static bool hypothesis_matches_context(const ViableTheorem& v, const Context& ctx);

private:
    const Theory& theory_;
    std::unordered_map<StatementId, double> freq_;
    Options opt_;
};

/// Guidance that knows a proof. Test instrument for the search machinery.
class OracleGuidance : public GuidanceModel {
public:
    /// `proof` must verify for `ctx`. Detours that revisit an ancestor's
    /// expression are cut out first.
    OracleGuidance(const Theory& theory, const Context& ctx, const ProofNode& proof, double epsilon = 1e-3);

    std::vector<double> relevance(const Context& ctx, const ParseTree& a, std::span<const ViableTheorem> viable) override;
    GenerateResult generate(const Context& ctx, const ParseTree& a, const ViableTheorem& theorem, int beam_width,
                            int token_limit) override;
    double payoff(const Context& ctx, const ParseTree& a) override;
    std::string kind() const override { return "oracle"; }

    /// The proof after removing detours.
    const ProofNode& proof() const { return proof_; }

private:
    struct Step {
        StatementId theorem;
        Substitution substitution;
    };
    void index(const ProofNode& node);

    const Theory& theory_;
    ProofNode proof_;
    double eps_;
    std::unordered_map<ParseTree, Step, ParseTreeHash> steps_;
    std::unordered_map<ParseTree, bool, ParseTreeHash> in_tree_;
    BaselineGuidance fallback_;
};

/// Remove subtrees between two red nodes with equal expressions, keeping the
/// deeper proof. The result proves the same root.
ProofNode shortcut_detours(const ProofNode& root);

/// Client for a model service speaking the newline-delimited JSON protocol
/// documented in docs/protocol.md.
class RemoteGuidance : public GuidanceModel {
public:
    RemoteGuidance(const Theory& theory, const TokenVocabulary& vocab, const std::string& endpoint,
                   std::chrono::milliseconds timeout = std::chrono::milliseconds(10000));
    ~RemoteGuidance() override;

    std::vector<double> relevance(const Context& ctx, const ParseTree& a, std::span<const ViableTheorem> viable) override;
    GenerateResult generate(const Context& ctx, const ParseTree& a, const ViableTheorem& theorem, int beam_width,
                            int token_limit) override;
    double payoff(const Context& ctx, const ParseTree& a) override;
    std::string kind() const override { return "remote"; }

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace mmp
