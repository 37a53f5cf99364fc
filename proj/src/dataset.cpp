#include "mmp/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <unordered_set>

#include "mmp/theory.hpp"
#include "mmp/verifier.hpp"

namespace mmp {

using json = nlohmann::json;

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "valid";
        case Split::test: return "test";
    }
    return "?";
}

const std::vector<StatementId>& SplitAssignment::members(Split s) const {
    return s == Split::train ? train : s == Split::validation ? validation : test;
}

SplitAssignment split_propositions(const Theory& theory, std::uint64_t seed) {
    std::vector<StatementId> props = theory.propositions();
    std::mt19937_64 rng(seed);
    std::shuffle(props.begin(), props.end(), rng);
    std::size_t n = props.size();
    std::size_t n_valid = n / 10, n_test = n / 10;
    std::size_t n_train = n - n_valid - n_test;
    SplitAssignment out;
    for (std::size_t i = 0; i < n; ++i) {
        Split s = i < n_train ? Split::train : i < n_train + n_valid ? Split::validation : Split::test;
        out.of[props[i]] = s;
    }
    for (auto& [id, s] : out.of) {
        if (s == Split::train) out.train.push_back(id);
        else if (s == Split::validation) out.validation.push_back(id);
        else out.test.push_back(id);
    }
    return out;
}

namespace {

void collect_steps(const ProofNode& n, StatementId ctx, Split split, std::vector<ProofStep>& out) {
    if (n.is_leaf()) return;
    out.push_back({ctx, n.expression, n.theorem, n.substitution, split});
    for (auto& c : n.children) collect_steps(c, ctx, split, out);
}

}  // namespace

std::vector<ProofStep> extract_steps(const Theory& theory, const SplitAssignment& splits,
                                     std::vector<std::string>* warnings) {
    std::vector<ProofStep> out;
    for (auto& [id, split] : splits.of) {
        const Database& db = theory.db();
        try {
            auto labels = decompress_proof(db[id], db);
            auto report = verify_rpn_proof(labels, db[id], id, db);
            if (!report) throw std::runtime_error(report.message);
            Context ctx = theory.context(id);
            ProofNode tree = tree_from_rpn(labels, ctx, theory);
            collect_steps(tree, id, split, out);
        } catch (const std::exception& e) {
            if (warnings) warnings->push_back(db.label(id) + ": " + e.what());
        }
    }
    return out;
}

std::vector<PayoffExample> make_payoff_examples(const Theory& theory, const std::vector<ProofStep>& steps,
                                                GuidanceModel& guidance) {
    std::vector<PayoffExample> out;
    std::unordered_set<ParseTree, ParseTreeHash> positive_exprs;
    auto key_seen = [](const ParseTree& e, std::vector<ParseTree>& bucket) {
        for (auto& b : bucket)
            if (b == e) return true;
        bucket.push_back(e);
        return false;
    };
    std::map<StatementId, std::vector<ParseTree>> pos_by_ctx, neg_by_ctx;
    for (auto& s : steps) {
        positive_exprs.insert(s.expression);
        if (!key_seen(s.expression, pos_by_ctx[s.context]))
            out.push_back({s.context, s.expression, true, s.split});
    }
    std::map<StatementId, Context> contexts;
    for (auto& s : steps) {
        auto it = contexts.find(s.context);
        if (it == contexts.end()) it = contexts.emplace(s.context, theory.context(s.context)).first;
        const Context& ctx = it->second;
        auto viable = viable_theorems(s.expression, ctx, theory);
        if (viable.empty()) continue;
        std::vector<double> p;
        try {
            p = guidance.relevance(ctx, s.expression, viable);
        } catch (const GuidanceError&) {
            continue;
        }
        std::vector<std::size_t> order(viable.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] > p[b]; });
        int taken = 0;
        for (std::size_t i : order) {
            if (taken == 2) break;
            GenerateResult g;
            try {
                g = guidance.generate(ctx, s.expression, viable[i], 1, 75);
            } catch (const GuidanceError&) {
                continue;
            }
            if (g.candidates.empty()) continue;
            ++taken;
            for (auto& h : viable[i].frame->hypotheses) {
                ParseTree e = apply_substitution(h, g.candidates.front().substitution);
                if (positive_exprs.count(e)) continue;
                if (!key_seen(e, neg_by_ctx[s.context])) out.push_back({s.context, e, false, s.split});
            }
        }
    }
    return out;
}

std::string render_tree(const Theory& theory, const ParseTree& t) {
    auto syms = theory.grammar().render(t);
    std::string out = theory.db().name(syms[0]);
    for (std::size_t i = 1; i < syms.size(); ++i) out += " " + theory.db().name(syms[i]);
    return out;
}

namespace {

// Per token of tokenize(groups, ...): the placeholder index at that position, or -1.
void mark_placeholders(const ParseTree& t, std::vector<int>& out) {
    out.push_back(t.is_variable() && is_placeholder(t.var()) ? -2 - t.var() : -1);
    for (auto& c : t.children()) mark_placeholders(c, out);
}

std::vector<int> placeholder_marks(const std::vector<std::vector<ParseTree>>& groups) {
    std::vector<int> out;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (g > 0) out.push_back(-1);
        for (std::size_t i = 0; i < groups[g].size(); ++i) {
            if (i > 0) out.push_back(-1);
            mark_placeholders(groups[g][i], out);
        }
    }
    return out;
}

json seq_json(const TokenSequence& s) { return json{{"tokens", s.tokens}, {"features", s.features}}; }

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
    }
    void write(const json& j) {
        out_ << j.dump() << '\n';
        ++count_;
    }
    long count() const { return count_; }

private:
    std::ofstream out_;
    long count_ = 0;
};

}  // namespace

json emit_dataset(const Theory& theory, const TokenVocabulary& vocab, GuidanceModel& guidance,
                  const DatasetOptions& opt) {
    const Database& db = theory.db();
    std::filesystem::create_directories(opt.out_dir);
    vocab.write(opt.out_dir / "vocab.txt");
    std::mt19937_64 rng(opt.seed);

    SplitAssignment splits = split_propositions(theory, opt.seed);
    std::vector<std::string> warnings;
    auto steps = extract_steps(theory, splits, &warnings);

    const Split all[] = {Split::train, Split::validation, Split::test};
    json manifest;
    manifest["seed"] = opt.seed;
    manifest["vocab_hash"] = vocab.hash();
    manifest["vocab_size"] = vocab.size();
    manifest["snapshot_hash"] = opt.snapshot_hash;
    manifest["guidance"] = guidance.kind();
    for (Split s : all) manifest["propositions"][split_name(s)] = splits.members(s).size();

    {
        Writer w(opt.out_dir / "theorems.jsonl");
        for (auto& f : theory.frames()) {
            std::vector<std::vector<ParseTree>> groups{f.hypotheses, {f.assertion}};
            auto ren = random_renaming(occurring_variables(groups), vocab, db, rng);
            json rec = seq_json(tokenize(groups, ren, vocab, db));
            rec["label"] = db.label(f.label);
            rec["position"] = f.label;
            rec["axiom"] = f.is_axiom;
            rec["unconstrained"] = f.unconstrained.size();
            w.write(rec);
        }
        manifest["counts"]["theorems"] = w.count();
    }

    std::map<StatementId, Context> contexts;
    auto context = [&](StatementId id) -> const Context& {
        auto it = contexts.find(id);
        if (it == contexts.end()) it = contexts.emplace(id, theory.context(id)).first;
        return it->second;
    };

    for (Split s : all) {
        Writer rel(opt.out_dir / (std::string("relevance_") + split_name(s) + ".jsonl"));
        Writer gen(opt.out_dir / (std::string("generative_") + split_name(s) + ".jsonl"));
        for (auto& step : steps) {
            if (step.split != s) continue;
            const Context& ctx = context(step.context);
            const TheoremFrame* f = theory.frame(step.theorem);

            std::vector<std::vector<ParseTree>> groups{ctx.hypotheses(), {step.expression}};
            auto ren = random_renaming(occurring_variables(groups), vocab, db, rng);
            json rec = seq_json(tokenize(groups, ren, vocab, db));
            rec["context"] = db.label(step.context);
            rec["split"] = split_name(s);
            rec["theorem"] = db.label(step.theorem);
            json viable = json::array();
            for (auto& v : viable_theorems(step.expression, ctx, theory)) viable.push_back(db.label(v.frame->label));
            rec["viable"] = std::move(viable);
            rec["expression"] = render_tree(theory, step.expression);
            json subst = json::object();
            for (auto& [var, image] : step.substitution) subst[db.name(var)] = render_tree(theory, image);
            rec["substitution"] = std::move(subst);
            rel.write(rec);

            if (f->unconstrained.empty()) continue;
            ViableTheorem vt{f, {}};
            for (auto v : f->constrained) vt.constrained[v] = step.substitution.at(v);
            std::vector<std::vector<ParseTree>> cond{ctx.hypotheses(), partial_hypotheses(vt)};
            std::vector<std::vector<ParseTree>> with_targets = cond;
            std::vector<ParseTree> targets;
            for (auto u : f->unconstrained) targets.push_back(step.substitution.at(u));
            with_targets.push_back(targets);
            std::vector<std::pair<SymbolId, SymbolId>> vars;
            for (auto& [v, t] : occurring_variables(with_targets))
                if (!is_placeholder(v)) vars.emplace_back(v, t);
            auto gren = random_renaming(vars, vocab, db, rng);
            for (std::size_t k = 0; k < f->unconstrained.size(); ++k) gren[placeholder_symbol(k)] = kUV;
            json g = seq_json(tokenize(cond, gren, vocab, db));
            g["placeholders"] = placeholder_marks(cond);
            g["context"] = db.label(step.context);
            g["split"] = split_name(s);
            g["theorem"] = db.label(step.theorem);
            json tj = json::array();
            for (std::size_t k = 0; k < targets.size(); ++k) {
                auto ts = tokenize({{targets[k]}}, gren, vocab, db);
                tj.push_back({{"typecode", db.name(targets[k].typecode())}, {"tokens", ts.tokens}});
            }
            g["targets"] = std::move(tj);
            gen.write(g);
        }
        manifest["counts"][std::string("relevance_") + split_name(s)] = rel.count();
        manifest["counts"][std::string("generative_") + split_name(s)] = gen.count();
    }

    if (opt.payoff) {
        auto examples = make_payoff_examples(theory, steps, guidance);
        for (Split s : all) {
            Writer w(opt.out_dir / (std::string("payoff_") + split_name(s) + ".jsonl"));
            long pos = 0, neg = 0;
            for (auto& ex : examples) {
                if (ex.split != s) continue;
                const Context& ctx = context(ex.context);
                std::vector<std::vector<ParseTree>> groups{ctx.hypotheses(), {ex.expression}};
                auto ren = random_renaming(occurring_variables(groups), vocab, db, rng);
                json rec = seq_json(tokenize(groups, ren, vocab, db));
                rec["context"] = db.label(ex.context);
                rec["split"] = split_name(s);
                rec["label"] = ex.positive ? 1 : 0;
                w.write(rec);
                (ex.positive ? pos : neg) += 1;
            }
            manifest["counts"][std::string("payoff_") + split_name(s)] = {{"positive", pos}, {"negative", neg}};
        }
    }

    manifest["warnings"] = warnings;
    std::ofstream(opt.out_dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
    return manifest;
}

}  // namespace mmp
