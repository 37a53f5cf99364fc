// mmprover: verify, prove, extract and bench over a Metamath database.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mmp/dataset.hpp"
#include "mmp/digest.hpp"
#include "mmp/guidance.hpp"
#include "mmp/search.hpp"
#include "mmp/theory.hpp"
#include "mmp/tokens.hpp"
#include "mmp/verifier.hpp"

namespace {

using namespace mmp;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string db;
    std::vector<std::string> theorems;
    bool all_test = false;
    long passes = 10000;
    double timeout = 300;
    std::vector<int> beams{5};
    double alpha = 1.0, beta = 0.5, gamma = 3.0;
    std::string guidance = "baseline";
    std::string endpoint;
    std::uint64_t seed = 0;
    int threads = 1;
    int jobs = 1;
    std::string out;
    std::string trace;
    bool no_payoff = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read database '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<StatementId> resolve_theorems(const Theory& theory, const Config& cfg) {
    std::vector<StatementId> out;
    for (auto& l : cfg.theorems) {
        auto id = theory.db().find(l);
        if (!id) throw UsageError("unknown label '" + l + "'");
        out.push_back(*id);
    }
    if (cfg.all_test) {
        auto split = split_propositions(theory, cfg.seed);
        out.insert(out.end(), split.test.begin(), split.test.end());
    }
    return out;
}

int cmd_verify(const Config& cfg) {
    auto theory = Theory::parse(read_file(cfg.db));
    const Database& db = theory->db();
    std::vector<StatementId> targets;
    for (auto& l : cfg.theorems) {
        auto id = db.find(l);
        if (!id || db[*id].kind != StatementKind::proposition) throw UsageError("unknown proposition '" + l + "'");
        targets.push_back(*id);
    }
    if (targets.empty())
        for (std::size_t i = 0; i < db.size(); ++i)
            if (db[static_cast<StatementId>(i)].kind == StatementKind::proposition)
                targets.push_back(static_cast<StatementId>(i));
    int failed = 0;
    for (auto id : targets) {
        auto r = verify_proposition(id, db);
        if (r) std::cout << db.label(id) << "\tOK\n";
        else {
            ++failed;
            std::cout << db.label(id) << "\tFAIL\t" << r.message << '\n';
        }
    }
    std::cout << "# verified " << targets.size() - static_cast<std::size_t>(failed) << " of " << targets.size() << '\n';
    return failed ? kExitFail : kExitOk;
}

struct ProveOutcome {
    StatementId id;
    bool proved = false;
    long passes = 0;
    double seconds = 0;
    int beam = 0;
    std::size_t nodes = 0;
    std::string reason;
    std::string block;
};

class Prover {
public:
    Prover(const Config& cfg, const Theory& theory, const std::string& source)
        : cfg_(cfg), theory_(theory), source_(source) {
        auto split = split_propositions(theory, cfg.seed);
        freq_ = usage_frequencies(theory, split.train);
        if (cfg.guidance == "remote") {
            if (cfg.endpoint.empty()) throw UsageError("--guidance remote needs --endpoint host:port");
            vocab_ = TokenVocabulary::build(theory.grammar());
        } else if (cfg.guidance != "baseline" && cfg.guidance != "oracle") {
            throw UsageError("unknown guidance '" + cfg.guidance + "'");
        }
        if (!cfg.trace.empty()) {
            trace_.open(cfg.trace);
            if (!trace_) throw UsageError("cannot write trace file '" + cfg.trace + "'");
        }
    }

    ProveOutcome prove_one(StatementId id) {
        ProveOutcome out;
        out.id = id;
        Context ctx = theory_.context(id);
        std::unique_ptr<GuidanceModel> guidance;
        try {
            guidance = make_guidance(ctx);
        } catch (const std::exception& e) {
            out.reason = e.what();
            return out;
        }
        for (int beam : cfg_.beams) {
            SearchParams p;
            p.alpha = cfg_.alpha;
            p.beta = cfg_.beta;
            p.gamma = cfg_.gamma;
            p.pass_limit = cfg_.passes;
            p.wall_clock_limit = cfg_.timeout;
            p.beam_width = beam;
            p.threads = cfg_.threads;
            p.seed = cfg_.seed;
            std::ostringstream trace;
            if (trace_.is_open()) p.trace = &trace;
            SearchResult r = prove(theory_, ctx, *guidance, p);
            if (trace_.is_open()) {
                std::lock_guard lock(mu_);
                trace_ << nlohmann::json{{"theorem", theory_.db().label(id)}, {"beam", beam}}.dump() << '\n'
                       << trace.str();
            }
            out.passes += r.passes;
            out.seconds += r.seconds;
            out.beam = beam;
            out.nodes = r.red_nodes;
            out.reason = r.failure;
            if (!r.proved) continue;
            ProofBlock block = write_proof_block(*r.proof, ctx, theory_);
            auto check = recheck_proof_block(source_, block);
            if (!check) {
                out.reason = "written proof failed re-verification: " + check.message;
                continue;
            }
            out.proved = true;
            out.reason.clear();
            out.block = block.text;
            break;
        }
        return out;
    }

private:
    std::unique_ptr<GuidanceModel> make_guidance(const Context& ctx) {
        if (cfg_.guidance == "oracle") {
            const Database& db = theory_.db();
            if (db[ctx.label()].kind != StatementKind::proposition)
                throw std::runtime_error("oracle guidance needs a proposition with a proof");
            auto labels = decompress_proof(db[ctx.label()], db);
            ProofNode known = tree_from_rpn(labels, ctx, theory_);
            return std::make_unique<OracleGuidance>(theory_, ctx, known);
        }
        if (cfg_.guidance == "remote") return std::make_unique<RemoteGuidance>(theory_, vocab_, cfg_.endpoint);
        return std::make_unique<BaselineGuidance>(theory_, freq_);
    }

    const Config& cfg_;
    const Theory& theory_;
    const std::string& source_;
    std::unordered_map<StatementId, double> freq_;
    TokenVocabulary vocab_;
    std::ofstream trace_;
    std::mutex mu_;
};

std::vector<ProveOutcome> run_all(const Config& cfg, const Theory& theory, const std::string& source,
                                  const std::vector<StatementId>& targets) {
    Prover prover(cfg, theory, source);
    std::vector<ProveOutcome> results(targets.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < targets.size();) results[i] = prover.prove_one(targets[i]);
    };
    int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(targets.size())));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return results;
}

void write_proofs(const Config& cfg, const std::string& source, const std::vector<ProveOutcome>& results) {
    if (cfg.out.empty()) return;
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + cfg.out + "'");
    out << source;
    for (auto& r : results)
        if (r.proved) out << r.block;
}

int cmd_prove(const Config& cfg) {
    std::string source = read_file(cfg.db);
    auto theory = Theory::parse(source);
    auto targets = resolve_theorems(*theory, cfg);
    if (targets.empty()) throw UsageError("no theorem given (use --theorem or --all-test)");
    auto results = run_all(cfg, *theory, source, targets);
    write_proofs(cfg, source, results);
    std::cout << "theorem\tproved\tpasses\tseconds\tbeam\tnodes\treason\n";
    bool all = true;
    for (auto& r : results) {
        all = all && r.proved;
        std::cout << theory->db().label(r.id) << '\t' << (r.proved ? "yes" : "no") << '\t' << r.passes << '\t'
                  << std::fixed << std::setprecision(3) << r.seconds << '\t' << r.beam << '\t' << r.nodes << '\t'
                  << (r.reason.empty() ? "-" : r.reason) << '\n';
    }
    return all ? kExitOk : kExitFail;
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    auto idx = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1) + 0.5);
    return v[std::min(idx, v.size() - 1)];
}

int cmd_bench(const Config& cfg) {
    std::string source = read_file(cfg.db);
    auto theory = Theory::parse(source);
    auto targets = resolve_theorems(*theory, cfg);
    if (targets.empty()) throw UsageError("empty proposition set (use --theorem or --all-test)");
    auto results = run_all(cfg, *theory, source, targets);
    write_proofs(cfg, source, results);
    std::vector<double> passes, times;
    std::size_t proved = 0;
    for (auto& r : results) {
        times.push_back(r.seconds);
        if (r.proved) {
            ++proved;
            passes.push_back(static_cast<double>(r.passes));
        }
    }
    std::cout << "guidance\ttheorems\tproved\tfraction\tmedian_passes\ttime_p50\ttime_p90\ttime_max\n";
    std::cout << cfg.guidance << '\t' << results.size() << '\t' << proved << '\t' << std::fixed << std::setprecision(4)
              << static_cast<double>(proved) / static_cast<double>(results.size()) << '\t' << std::setprecision(1)
              << percentile(passes, 0.5) << '\t' << std::setprecision(3) << percentile(times, 0.5) << '\t'
              << percentile(times, 0.9) << '\t' << percentile(times, 1.0) << '\n';
    return kExitOk;
}

int cmd_extract(const Config& cfg) {
    if (cfg.out.empty()) throw UsageError("extract needs --out DIR");
    std::string source = read_file(cfg.db);
    auto theory = Theory::parse(source);
    auto split = split_propositions(*theory, cfg.seed);
    BaselineGuidance guidance(*theory, usage_frequencies(*theory, split.train));
    auto vocab = TokenVocabulary::build(theory->grammar());
    DatasetOptions opt;
    opt.out_dir = cfg.out;
    opt.seed = cfg.seed;
    opt.snapshot_hash = sha256_hex(source);
    opt.payoff = !cfg.no_payoff;
    auto manifest = emit_dataset(*theory, vocab, guidance, opt);
    std::cout << manifest.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metamath proof search and verification"};
    app.require_subcommand(1);
    Config cfg;

    auto add_db = [&](CLI::App* c) { c->add_option("--db", cfg.db, "Metamath database (.mm)")->required(); };
    auto add_search = [&](CLI::App* c) {
        c->add_option("--theorem", cfg.theorems, "theorem label (repeatable)");
        c->add_flag("--all-test", cfg.all_test, "every proposition of the seeded test split");
        c->add_option("--passes", cfg.passes, "pass limit per attempt")->check(CLI::PositiveNumber);
        c->add_option("--timeout", cfg.timeout, "wall-clock seconds per attempt")->check(CLI::PositiveNumber);
        c->add_option("--beam", cfg.beams, "beam width; a list like 1,5,20 makes one attempt per width")
            ->delimiter(',')
            ->check(CLI::PositiveNumber);
        c->add_option("--alpha", cfg.alpha, "exploration weight")->check(CLI::PositiveNumber);
        c->add_option("--beta", cfg.beta, "prior value weight")->check(CLI::PositiveNumber);
        c->add_option("--gamma", cfg.gamma, "virtual loss per in-flight pass")->check(CLI::PositiveNumber);
        c->add_option("--guidance", cfg.guidance, "baseline, oracle or remote")
            ->check(CLI::IsMember({"baseline", "oracle", "remote"}));
        c->add_option("--endpoint", cfg.endpoint, "host:port of a model service");
        c->add_option("--seed", cfg.seed, "seed for splits and renaming");
        c->add_option("--threads", cfg.threads, "concurrent passes per search")->check(CLI::PositiveNumber);
        c->add_option("--jobs", cfg.jobs, "theorems searched concurrently")->check(CLI::PositiveNumber);
        c->add_option("--out", cfg.out, "write the database with appended proofs here");
        c->add_option("--trace", cfg.trace, "write a pass trace (NDJSON) here");
    };

    auto* verify = app.add_subcommand("verify", "verify stored proofs");
    add_db(verify);
    verify->add_option("--theorem", cfg.theorems, "proposition label (repeatable)");

    auto* prove = app.add_subcommand("prove", "search for proofs");
    add_db(prove);
    add_search(prove);

    auto* bench = app.add_subcommand("bench", "search a set of propositions and summarize");
    add_db(bench);
    add_search(bench);

    auto* extract = app.add_subcommand("extract", "write the training datasets");
    add_db(extract);
    extract->add_option("--out", cfg.out, "output directory")->required();
    extract->add_option("--seed", cfg.seed, "split and renaming seed");
    extract->add_flag("--no-payoff", cfg.no_payoff, "skip payoff examples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*verify) return cmd_verify(cfg);
        if (*prove) return cmd_prove(cfg);
        if (*bench) return cmd_bench(cfg);
        if (*extract) return cmd_extract(cfg);
    } catch (const UsageError& e) {
        std::cerr << "mmprover: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "mmprover: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
