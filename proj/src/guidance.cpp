#include "mmp/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <unordered_set>

#include "mmp/theory.hpp"

namespace mmp {

std::unordered_map<StatementId, double> usage_frequencies(const Theory& theory,
                                                          std::span<const StatementId> propositions) {
    std::unordered_map<StatementId, double> out;
    for (auto p : propositions) {
        std::vector<StatementId> labels;
        try {
            labels = decompress_proof(theory.db()[p], theory.db());
        } catch (const std::exception&) {
            continue;
        }
        for (auto id : labels)
            if (theory.frame(id)) out[id] += 1;
    }
    return out;
}

// ---------------------------------------------------------------- baseline

BaselineGuidance::BaselineGuidance(const Theory& theory, std::unordered_map<StatementId, double> frequencies)
    : BaselineGuidance(theory, std::move(frequencies), Options{}) {}

BaselineGuidance::BaselineGuidance(const Theory& theory, std::unordered_map<StatementId, double> frequencies,
                                   Options options)
    : theory_(theory), freq_(std::move(frequencies)), opt_(options) {}

bool BaselineGuidance::hypothesis_matches_context(const ViableTheorem& v, const Context& ctx) {
    for (auto& h : partial_hypotheses(v))
        for (auto& e : ctx.hypotheses()) {
            Substitution s;
            if (match_placeholders(h, e, s)) return true;
        }
    return false;
}

std::vector<double> BaselineGuidance::relevance(const Context& ctx, const ParseTree&,
                                                std::span<const ViableTheorem> viable) {
    std::vector<double> p;
    p.reserve(viable.size());
    double total = 0;
    for (auto& v : viable) {
        auto it = freq_.find(v.frame->label);
        double f = it == freq_.end() || it->second <= 0 ? opt_.unseen_frequency : it->second;
        if (hypothesis_matches_context(v, ctx)) f *= 1 + opt_.match_bonus;
        p.push_back(f);
        total += f;
    }
    for (auto& x : p) x /= total;
    return p;
}

namespace {

void collect_subtrees(const ParseTree& t, std::vector<ParseTree>& out, std::unordered_set<ParseTree, ParseTreeHash>& seen) {
    if (seen.insert(t).second) out.push_back(t);
    for (auto& c : t.children()) collect_subtrees(c, out, seen);
}

}  // namespace

GenerateResult BaselineGuidance::generate(const Context& ctx, const ParseTree& a, const ViableTheorem& theorem,
                                          int beam_width, int token_limit) {
    GenerateResult result;
    const TheoremFrame& f = *theorem.frame;
    if (f.unconstrained.empty()) {
        if (check_disjoint(theorem.constrained, f, ctx)) result.candidates.push_back({theorem.constrained, 1.0});
        return result;
    }

    // Candidate images, grouped by typecode and sorted by size.
    std::vector<ParseTree> pool;
    std::unordered_set<ParseTree, ParseTreeHash> seen;
    for (auto& e : ctx.hypotheses()) collect_subtrees(e, pool, seen);
    collect_subtrees(a, pool, seen);
    for (auto& tv : ctx.available_vars) {
        auto leaf = ParseTree::variable(tv.var, tv.typecode);
        if (seen.insert(leaf).second) pool.push_back(leaf);
    }
    for (auto& p : theory_.grammar().productions())
        if (p.slot_vars.empty() && p.label < ctx.position()) {
            auto leaf = ParseTree::apply(p.label, p.typecode, {});
            if (seen.insert(leaf).second) pool.push_back(leaf);
        }
    std::stable_sort(pool.begin(), pool.end(), [](auto& x, auto& y) { return x.size() < y.size(); });

    std::vector<std::vector<ParseTree>> options;
    for (auto u : f.unconstrained) {
        SymbolId type = f.find_var(u)->typecode;
        std::vector<ParseTree> opts;
        for (auto& t : pool)
            if (t.typecode() == type && static_cast<int>(opts.size()) < opt_.per_variable_candidates) opts.push_back(t);
        if (opts.empty()) return result;
        options.push_back(std::move(opts));
    }

    // Best-first over index tuples by total size.
    struct Item {
        std::size_t size;
        std::uint64_t seq;
        std::vector<std::size_t> idx;
        bool operator>(const Item& o) const { return size != o.size ? size > o.size : seq > o.seq; }
    };
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    std::set<std::vector<std::size_t>> visited;
    std::uint64_t seq = 0;
    auto push = [&](std::vector<std::size_t> idx) {
        if (!visited.insert(idx).second) return;
        std::size_t size = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) size += options[k][idx[k]].size();
        heap.push({size, seq++, std::move(idx)});
    };
    push(std::vector<std::size_t>(options.size(), 0));
    bool over_limit = false;
    int examined = 0;
    while (!heap.empty() && static_cast<int>(result.candidates.size()) < beam_width &&
           examined < opt_.max_combinations) {
        Item item = heap.top();
        heap.pop();
        ++examined;
        for (std::size_t k = 0; k < item.idx.size(); ++k)
            if (item.idx[k] + 1 < options[k].size()) {
                auto next = item.idx;
                ++next[k];
                push(std::move(next));
            }
        if (static_cast<int>(item.size) > token_limit) {
            over_limit = true;
            continue;
        }
        Substitution s = theorem.constrained;
        for (std::size_t k = 0; k < item.idx.size(); ++k) s[f.unconstrained[k]] = options[k][item.idx[k]];
        if (!check_disjoint(s, f, ctx)) continue;
        result.candidates.push_back({std::move(s), 0});
    }
    double total = 0;
    for (std::size_t r = 0; r < result.candidates.size(); ++r) total += 1.0 / static_cast<double>(r + 1);
    for (std::size_t r = 0; r < result.candidates.size(); ++r)
        result.candidates[r].probability = 1.0 / static_cast<double>(r + 1) / total;
    result.hit_token_limit = result.candidates.empty() && over_limit;
    return result;
}

double BaselineGuidance::payoff(const Context&, const ParseTree&) { return opt_.payoff; }

// ------------------------------------------------------------------ oracle

namespace {

const ProofNode* find_same(const ProofNode& node, const ParseTree& expr) {
    for (auto& c : node.children) {
        if (c.expression == expr) return &c;
        if (auto* d = find_same(c, expr)) return d;
    }
    return nullptr;
}

ProofNode shortcut_with(ProofNode node, const std::vector<ParseTree>& hyps) {
    for (;;) {
        if (!node.is_leaf()) {
            for (std::size_t i = 0; i < hyps.size(); ++i)
                if (hyps[i] == node.expression) {
                    ProofNode leaf;
                    leaf.expression = node.expression;
                    leaf.hypothesis = static_cast<int>(i);
                    return leaf;
                }
        }
        const ProofNode* d = find_same(node, node.expression);
        if (!d) break;
        ProofNode copy = *d;
        node = std::move(copy);
    }
    for (auto& c : node.children) c = shortcut_with(std::move(c), hyps);
    return node;
}

void collect_leaf_hyps(const ProofNode& n, std::vector<ParseTree>& out) {
    if (n.is_leaf()) {
        if (n.hypothesis >= 0) {
            if (out.size() <= static_cast<std::size_t>(n.hypothesis)) out.resize(static_cast<std::size_t>(n.hypothesis) + 1);
            out[static_cast<std::size_t>(n.hypothesis)] = n.expression;
        }
        return;
    }
    for (auto& c : n.children) collect_leaf_hyps(c, out);
}

}  // namespace

ProofNode shortcut_detours(const ProofNode& root) {
    std::vector<ParseTree> hyps;
    collect_leaf_hyps(root, hyps);
    return shortcut_with(root, hyps);
}

OracleGuidance::OracleGuidance(const Theory& theory, const Context& ctx, const ProofNode& proof, double epsilon)
    : theory_(theory), proof_(shortcut_with(proof, ctx.hypotheses())), eps_(epsilon), fallback_(theory, {}) {
    index(proof_);
}

void OracleGuidance::index(const ProofNode& node) {
    in_tree_.emplace(node.expression, true);
    if (node.is_leaf()) return;
    steps_.emplace(node.expression, Step{node.theorem, node.substitution});
    for (auto& c : node.children) index(c);
}

std::vector<double> OracleGuidance::relevance(const Context&, const ParseTree& a, std::span<const ViableTheorem> viable) {
    std::size_t n = viable.size();
    std::vector<double> p(n, 1.0 / static_cast<double>(n));
    auto it = steps_.find(a);
    if (it == steps_.end() || n == 1) return p;
    for (std::size_t i = 0; i < n; ++i)
        if (viable[i].frame->label == it->second.theorem) {
            std::fill(p.begin(), p.end(), eps_ / static_cast<double>(n - 1));
            p[i] = 1 - eps_;
            break;
        }
    return p;
}

GenerateResult OracleGuidance::generate(const Context& ctx, const ParseTree& a, const ViableTheorem& theorem,
                                        int beam_width, int token_limit) {
    auto it = steps_.find(a);
    if (it == steps_.end() || it->second.theorem != theorem.frame->label)
        return fallback_.generate(ctx, a, theorem, beam_width, token_limit);
    GenerateResult r;
    r.candidates.push_back({it->second.substitution, theorem.frame->unconstrained.empty() ? 1.0 : 1 - eps_});
    if (theorem.frame->unconstrained.empty()) return r;
    auto rest = fallback_.generate(ctx, a, theorem, beam_width, token_limit);
    for (auto& c : rest.candidates) {
        if (static_cast<int>(r.candidates.size()) >= beam_width) break;
        if (c.substitution == it->second.substitution) continue;
        r.candidates.push_back({std::move(c.substitution), eps_ * c.probability});
    }
    return r;
}

double OracleGuidance::payoff(const Context&, const ParseTree& a) { return in_tree_.count(a) ? 1.0 : 0.1; }

}  // namespace mmp
