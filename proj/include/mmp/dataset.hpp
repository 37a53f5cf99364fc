#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmp/guidance.hpp"
#include "mmp/tokens.hpp"
#include "mmp/unify.hpp"

namespace mmp {

class Theory;

enum class Split { train, validation, test };
const char* split_name(Split s);

struct SplitAssignment {
    std::map<StatementId, Split> of;
    std::vector<StatementId> train, validation, test;

    const std::vector<StatementId>& members(Split s) const;
};

/// Seeded uniform random 80/10/10 split of the provable propositions.
SplitAssignment split_propositions(const Theory& theory, std::uint64_t seed);

struct ProofStep {
    StatementId context = kNoStatement;
    ParseTree expression;
    StatementId theorem = kNoStatement;
    Substitution substitution;
    Split split = Split::train;
};

/// One step per inner node of each proposition's proof tree, propositions in
/// database order and nodes in pre-order. Propositions whose proofs fail to
/// verify are skipped and reported in `warnings`.
std::vector<ProofStep> extract_steps(const Theory& theory, const SplitAssignment& splits,
                                     std::vector<std::string>* warnings = nullptr);

struct PayoffExample {
    StatementId context = kNoStatement;
    ParseTree expression;
    bool positive = true;
    Split split = Split::train;
};

/// Positives: distinct (context, expression) pairs of the steps. Negatives:
/// hypotheses of the two most relevant (theorem, substitution) pairs the
/// guidance proposes at each step, minus anything equal to a positive.
std::vector<PayoffExample> make_payoff_examples(const Theory& theory, const std::vector<ProofStep>& steps,
                                                GuidanceModel& guidance);

struct DatasetOptions {
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    std::string snapshot_hash;
    bool payoff = true;
};

/// Write vocab.txt, theorems.jsonl, {relevance,generative,payoff}_{split}.jsonl
/// and manifest.json (layout in docs/dataset.md). Returns the manifest.
nlohmann::json emit_dataset(const Theory& theory, const TokenVocabulary& vocab, GuidanceModel& guidance,
                            const DatasetOptions& options);

/// Render a tree as its symbol string, typecode first.
std::string render_tree(const Theory& theory, const ParseTree& t);

}  // namespace mmp
