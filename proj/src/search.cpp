#include "mmp/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "mmp/theory.hpp"

namespace mmp {

double blue_priority(double x_b, long n_b, double v_b, int t_b, long n_a, const SearchParams& params) {
    double nb = static_cast<double>(n_b);
    double explore = n_a > 1 ? std::sqrt(std::log(static_cast<double>(n_a)) / nb) : 0.0;
    return x_b / (nb + params.gamma * t_b) + params.beta * v_b / nb + params.alpha * explore;
}

long child_allowance(long n, int divisor) { return (n + divisor - 1) / divisor; }

// Candidates of one red node, popped in decreasing value. Theorem entries
// stand in for all substitutions of that theorem until generation runs.
struct ExpansionQueue {
    struct Entry {
        double value;
        std::uint64_t seq;
        int theorem;    // index into the red node's viable list
        int candidate;  // index into generated[theorem], or -1 for the theorem itself
        bool operator<(const Entry& o) const { return value != o.value ? value < o.value : seq > o.seq; }
    };
    std::vector<double> p;
    double p_best = 0;
    std::vector<std::vector<GeneratedSubstitution>> generated;
    std::priority_queue<Entry> heap;
    std::uint64_t seq = 0;
};

struct ProofSearch::ChildPlan {
    ParseTree expr;
    int hypothesis = -1;
    double y = 0;
    std::vector<ViableTheorem> viable;
    std::optional<std::pair<StatementId, Substitution>> closing;
};

struct ProofSearch::Plan {
    enum class Kind { created, dummy, exhausted } kind = Kind::exhausted;
    StatementId theorem = kNoStatement;
    Substitution substitution;
    double v = 0;
    std::vector<ChildPlan> children;
};

ProofSearch::ProofSearch(const Theory& theory, const Context& ctx, GuidanceModel& guidance, SearchParams params)
    : theory_(theory), ctx_(ctx), guidance_(guidance), params_(params) {
    ChildPlan root = plan_child(ctx.assertion());
    int id = new_red(root.expr, -1);
    RedNode& r = reds_[static_cast<std::size_t>(id)];
    r.hypothesis = root.hypothesis;
    r.viable = std::move(root.viable);
    if (r.hypothesis >= 0) {
        r.evaluated = true;
        r.y = 1;
    } else if (root.closing) {
        Plan p;
        p.kind = Plan::Kind::created;
        p.theorem = root.closing->first;
        p.substitution = root.closing->second;
        p.v = 1;
        const TheoremFrame* f = theory_.frame(p.theorem);
        for (auto& h : f->hypotheses) {
            ChildPlan c;
            c.expr = apply_substitution(h, p.substitution);
            c.hypothesis = ctx_.hypothesis_index(c.expr);
            c.y = 1;
            p.children.push_back(std::move(c));
        }
        int b = attach(p, id);
        reds_[static_cast<std::size_t>(id)].children.push_back(b);
    }
    recompute_red(reds_[static_cast<std::size_t>(id)]);
}

ProofSearch::~ProofSearch() = default;

int ProofSearch::new_red(ParseTree expr, int parent) {
    RedNode r;
    r.id = static_cast<int>(reds_.size());
    r.expression = std::move(expr);
    r.parent = parent;
    reds_.push_back(std::move(r));
    return reds_.back().id;
}

bool ProofSearch::root_proven() const {
    std::lock_guard lock(mu_);
    return reds_[0].proven;
}

bool ProofSearch::root_dead() const {
    std::lock_guard lock(mu_);
    return reds_[0].dead;
}

long ProofSearch::passes() const {
    std::lock_guard lock(mu_);
    return passes_;
}

double ProofSearch::safe_payoff(const ParseTree& a) {
    try {
        double y = guidance_.payoff(ctx_, a);
        return std::isfinite(y) ? std::clamp(y, 0.0, 1.0) : 0.5;
    } catch (const GuidanceError&) {
        return 0.5;
    }
}

std::optional<std::pair<StatementId, Substitution>> ProofSearch::last_step(const ParseTree&,
                                                                           const std::vector<ViableTheorem>& viable) {
    const auto& hyps = ctx_.hypotheses();
    for (auto& v : viable) {
        auto partial = partial_hypotheses(v);
        std::optional<Substitution> found;
        // Backtracking assignment of each hypothesis to a member of e_C.
        auto assign = [&](auto& self, std::size_t k, const Substitution& s) -> bool {
            if (k == partial.size()) {
                auto full = complete_substitution(v, s);
                if (!full || !check_disjoint(*full, *v.frame, ctx_) || !well_typed(*full, *v.frame, ctx_)) return false;
                found = std::move(full);
                return true;
            }
            for (auto& e : hyps) {
                Substitution next = s;
                if (match_placeholders(partial[k], e, next) && self(self, k + 1, next)) return true;
            }
            return false;
        };
        if (assign(assign, 0, Substitution{})) return std::make_pair(v.frame->label, std::move(*found));
    }
    return std::nullopt;
}

ProofSearch::ChildPlan ProofSearch::plan_child(const ParseTree& expr) {
    ChildPlan c;
    c.expr = expr;
    c.hypothesis = ctx_.hypothesis_index(expr);
    if (c.hypothesis >= 0) {
        c.y = 1;
        return c;
    }
    c.viable = viable_theorems(expr, ctx_, theory_);
    c.closing = last_step(expr, c.viable);
    return c;
}

ProofSearch::Plan ProofSearch::plan_expansion(RedNode& a, const std::vector<ParseTree>& ancestors) {
    Plan plan;
    if (!a.queue) {
        a.queue = std::make_unique<ExpansionQueue>();
        ExpansionQueue& q = *a.queue;
        if (!a.viable.empty()) {
            try {
                q.p = guidance_.relevance(ctx_, a.expression, a.viable);
                bool sane = q.p.size() == a.viable.size();
                double total = 0;
                for (double x : q.p) {
                    sane = sane && std::isfinite(x) && x >= 0;
                    total += x;
                }
                if (!(total > 0)) sane = false;
                if (!sane) throw GuidanceError(GuidanceError::Kind::protocol, "bad relevance");
            } catch (const GuidanceError&) {
                q.p.assign(a.viable.size(), 1.0 / static_cast<double>(a.viable.size()));
            }
            q.p_best = *std::max_element(q.p.begin(), q.p.end());
            q.generated.resize(a.viable.size());
            for (std::size_t i = 0; i < a.viable.size(); ++i)
                q.heap.push({q.p[i] / q.p_best, q.seq++, static_cast<int>(i), -1});
        }
    }
    ExpansionQueue& q = *a.queue;
    while (!q.heap.empty()) {
        auto e = q.heap.top();
        q.heap.pop();
        const ViableTheorem& vt = a.viable[static_cast<std::size_t>(e.theorem)];
        const TheoremFrame& f = *vt.frame;
        if (e.candidate < 0) {
            GenerateResult g;
            try {
                g = guidance_.generate(ctx_, a.expression, vt, params_.beam_width, params_.token_limit);
            } catch (const GuidanceError&) {
                g.hit_token_limit = true;
            }
            auto& list = q.generated[static_cast<std::size_t>(e.theorem)];
            for (auto& c : g.candidates) {
                if (c.substitution.size() != f.free_vars.size() || !well_typed(c.substitution, f, ctx_) ||
                    !check_disjoint(c.substitution, f, ctx_) ||
                    !(apply_substitution(f.assertion, c.substitution) == a.expression))
                    continue;
                bool dup = false;
                for (auto& o : list) dup = dup || o.substitution == c.substitution;
                if (!dup && std::isfinite(c.probability) && c.probability >= 0) list.push_back(std::move(c));
            }
            if (list.empty()) {
                if (g.hit_token_limit) {
                    plan.kind = Plan::Kind::dummy;
                    return plan;
                }
                continue;
            }
            double best = 0;
            for (auto& c : list) best = std::max(best, c.probability);
            for (std::size_t i = 0; i < list.size(); ++i) {
                double rel = best > 0 ? list[i].probability / best : 1.0 / static_cast<double>(i + 1);
                q.heap.push({e.value * rel, q.seq++, e.theorem, static_cast<int>(i)});
            }
            continue;
        }
        const Substitution& phi = q.generated[static_cast<std::size_t>(e.theorem)][static_cast<std::size_t>(e.candidate)].substitution;
        std::vector<ParseTree> hyps;
        bool circular = false;
        for (auto& h : f.hypotheses) {
            hyps.push_back(apply_substitution(h, phi));
            for (auto& anc : ancestors) circular = circular || anc == hyps.back();
        }
        if (circular) continue;
        plan.kind = Plan::Kind::created;
        plan.theorem = f.label;
        plan.substitution = phi;
        plan.v = e.value;
        for (auto& h : hyps) {
            ChildPlan c = plan_child(h);
            if (c.hypothesis < 0) c.y = safe_payoff(h);
            plan.children.push_back(std::move(c));
        }
        return plan;
    }
    plan.kind = Plan::Kind::exhausted;
    return plan;
}

int ProofSearch::attach(const Plan& plan, int parent_red) {
    BlueNode b;
    b.id = static_cast<int>(blues_.size());
    b.parent = parent_red;
    b.theorem = plan.theorem;
    b.substitution = plan.substitution;
    b.v = plan.v;
    blues_.push_back(std::move(b));
    int bid = blues_.back().id;
    for (auto& c : plan.children) {
        int rid = new_red(c.expr, bid);
        RedNode& r = reds_[static_cast<std::size_t>(rid)];
        r.hypothesis = c.hypothesis;
        r.viable = c.viable;
        r.evaluated = true;
        r.y = c.y;
        if (c.closing) {
            Plan close;
            close.kind = Plan::Kind::created;
            close.theorem = c.closing->first;
            close.substitution = c.closing->second;
            close.v = 1;
            for (auto& h : theory_.frame(close.theorem)->hypotheses) {
                ChildPlan leaf;
                leaf.expr = apply_substitution(h, close.substitution);
                leaf.hypothesis = ctx_.hypothesis_index(leaf.expr);
                leaf.y = 1;
                close.children.push_back(std::move(leaf));
            }
            int lb = attach(close, rid);
            reds_[static_cast<std::size_t>(rid)].children.push_back(lb);
        }
        recompute_red(reds_[static_cast<std::size_t>(rid)]);
        blues_[static_cast<std::size_t>(bid)].children.push_back(rid);
    }
    recompute_blue(blues_[static_cast<std::size_t>(bid)]);
    return bid;
}

void ProofSearch::recompute_red(RedNode& r) {
    r.x = r.evaluated ? r.y : 0;
    r.n = r.evaluated ? 1 : 0;
    bool any_proven = false;
    for (int c : r.children) {
        const BlueNode& b = blues_[static_cast<std::size_t>(c)];
        r.x += b.x;
        r.n += b.n;
        any_proven = any_proven || b.proven;
    }
    r.proven = r.hypothesis >= 0 || any_proven;
    r.dead = !r.proven && r.children.empty() && r.exhausted;
}

void ProofSearch::recompute_blue(BlueNode& b) {
    if (b.dummy) return;
    bool all_proven = true, any_dead = false;
    for (int c : b.children) {
        const RedNode& r = reds_[static_cast<std::size_t>(c)];
        all_proven = all_proven && r.proven;
        any_dead = any_dead || r.dead;
    }
    b.proven = all_proven;
    b.dead = any_dead;
    b.least = -1;
    double best = 0;
    for (int c : b.children) {
        const RedNode& r = reds_[static_cast<std::size_t>(c)];
        if (!all_proven && r.proven) continue;
        double avg = r.n > 0 ? r.x / static_cast<double>(r.n) : 0;
        if (b.least < 0 || avg < best) {
            b.least = c;
            best = avg;
        }
    }
    if (b.least < 0) {
        b.x = 1;
        b.n = 1;
    } else {
        b.x = reds_[static_cast<std::size_t>(b.least)].x;
        b.n = reds_[static_cast<std::size_t>(b.least)].n;
    }
}

void ProofSearch::propagate(const std::vector<int>& reds, const std::vector<int>& blues) {
    // reds[k] is the parent of blues[k]; blues[k] is the parent of reds[k + 1].
    for (std::size_t k = reds.size(); k-- > 0;) {
        RedNode& r = reds_[static_cast<std::size_t>(reds[k])];
        if (k < blues.size()) {
            BlueNode& b = blues_[static_cast<std::size_t>(blues[k])];
            recompute_blue(b);
            if (b.dead) std::erase(r.children, b.id);
        }
        recompute_red(r);
    }
}

int ProofSearch::select_child(const RedNode& a) const {
    int best = -1;
    double best_p = 0;
    for (int c : a.children) {
        const BlueNode& b = blues_[static_cast<std::size_t>(c)];
        if (b.proven || b.dead) continue;
        double p = blue_priority(b.x, b.n, b.v, b.t, a.n, params_);
        if (best < 0 || p > best_p) {
            best = c;
            best_p = p;
        }
    }
    return best;
}

void ProofSearch::trace(const char* action, const std::vector<int>& reds, const std::vector<int>& blues, double value) {
    if (!params_.trace) return;
    nlohmann::json path = nlohmann::json::array();
    for (std::size_t k = 0; k < reds.size(); ++k) {
        path.push_back("r" + std::to_string(reds[k]));
        if (k < blues.size()) path.push_back("b" + std::to_string(blues[k]));
    }
    nlohmann::json rec{{"pass", passes_}, {"path", std::move(path)}, {"action", action}, {"value", value}};
    *params_.trace << rec.dump() << '\n';
}

PassOutcome ProofSearch::run_pass() {
    std::unique_lock lock(mu_);
    if (reds_[0].proven || reds_[0].dead) return PassOutcome::finished;
    std::vector<int> path_r{0}, path_b;
    auto release = [&] {
        for (int b : path_b) --blues_[static_cast<std::size_t>(b)].t;
    };
    int a = 0;
    for (;;) {
        RedNode& r = reds_[static_cast<std::size_t>(a)];
        if (!r.evaluated) {
            if (r.expanding) {
                release();
                return PassOutcome::busy;
            }
            r.expanding = true;
            ParseTree expr = r.expression;
            lock.unlock();
            double y = safe_payoff(expr);
            lock.lock();
            RedNode& rr = reds_[static_cast<std::size_t>(a)];
            rr.expanding = false;
            rr.y = y;
            rr.evaluated = true;
            ++passes_;
            propagate(path_r, path_b);
            trace("evaluate", path_r, path_b, y);
            release();
            return PassOutcome::evaluated;
        }
        bool may_expand = !r.exhausted && !r.expanding &&
                          static_cast<long>(r.children.size()) < child_allowance(r.n, params_.child_divisor);
        if (may_expand) {
            r.expanding = true;
            std::vector<ParseTree> ancestors;
            for (int id : path_r) ancestors.push_back(reds_[static_cast<std::size_t>(id)].expression);
            RedNode* node = &r;
            lock.unlock();
            Plan plan = plan_expansion(*node, ancestors);
            lock.lock();
            node->expanding = false;
            ++passes_;
            PassOutcome out;
            double value = 0;
            if (plan.kind == Plan::Kind::created) {
                int b = attach(plan, a);
                node->children.push_back(b);
                out = PassOutcome::expanded;
                value = plan.v;
                path_b.push_back(b);
                // The new blue node's statistics already reflect one visit per child.
                propagate(path_r, path_b);
                path_b.pop_back();
            } else if (plan.kind == Plan::Kind::dummy) {
                BlueNode d;
                d.id = static_cast<int>(blues_.size());
                d.parent = a;
                d.dummy = true;
                d.n = 1;
                blues_.push_back(std::move(d));
                node->children.push_back(blues_.back().id);
                out = PassOutcome::dummy_added;
                propagate(path_r, path_b);
            } else {
                node->exhausted = true;
                out = PassOutcome::dead_end;
                propagate(path_r, path_b);
            }
            trace(out == PassOutcome::expanded ? "expand" : out == PassOutcome::dummy_added ? "dummy" : "dead_end", path_r,
                  path_b, value);
            release();
            return out;
        }
        int c = select_child(r);
        if (c < 0) {
            // Either another pass is expanding this childless node, or
            // nothing is left here; death is recorded by propagate.
            release();
            return PassOutcome::busy;
        }
        BlueNode& b = blues_[static_cast<std::size_t>(c)];
        ++b.t;
        path_b.push_back(c);
        if (b.dummy) {
            ++b.n;
            ++passes_;
            propagate(path_r, path_b);
            trace("visit_dummy", path_r, path_b, 0);
            release();
            return PassOutcome::visited_dummy;
        }
        a = b.least;
        path_r.push_back(a);
    }
}

SearchResult ProofSearch::run() {
    using clock = std::chrono::steady_clock;
    auto start = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };
    SearchResult res;
    std::atomic<bool> timed_out{false}, pass_limit{false}, stalled{false};
    auto worker = [&] {
        for (;;) {
            {
                std::lock_guard lock(mu_);
                if (reds_[0].proven || reds_[0].dead) return;
                if (passes_ >= params_.pass_limit) {
                    pass_limit = true;
                    return;
                }
            }
            if (elapsed() >= params_.wall_clock_limit) {
                timed_out = true;
                return;
            }
            if (run_pass() == PassOutcome::busy) {
                if (params_.threads <= 1) {
                    stalled = true;
                    return;
                }
                std::this_thread::yield();
            }
        }
    };
    if (params_.threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < params_.threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::lock_guard lock(mu_);
    res.passes = passes_;
    res.red_nodes = reds_.size();
    res.blue_nodes = blues_.size();
    res.root_dead = reds_[0].dead;
    res.proved = reds_[0].proven;
    res.timed_out = !res.proved && !res.root_dead && timed_out;
    res.pass_limit = !res.proved && !res.root_dead && pass_limit;
    res.seconds = elapsed();
    if (!res.proved)
        res.failure = res.root_dead ? "root dead" : res.timed_out ? "timeout" : res.pass_limit ? "pass limit" : stalled ? "stalled" : "stopped";
    return res;
}

long ProofSearch::pruned_size(int red, std::vector<long>& sizes) const {
    long& memo = sizes[static_cast<std::size_t>(red)];
    if (memo >= 0) return memo;
    const RedNode& r = reds_[static_cast<std::size_t>(red)];
    long best = -1;
    if (r.hypothesis >= 0) best = 1;
    else
        for (int c : r.children) {
            const BlueNode& b = blues_[static_cast<std::size_t>(c)];
            if (!b.proven) continue;
            long s = 1;
            for (int k : b.children) s += pruned_size(k, sizes);
            if (best < 0 || s < best) best = s;
        }
    memo = best;
    return best;
}

ProofNode ProofSearch::prune_red(int id, std::vector<long>& sizes) const {
    const RedNode& r = reds_[static_cast<std::size_t>(id)];
    ProofNode out;
    out.expression = r.expression;
    if (r.hypothesis >= 0) {
        out.hypothesis = r.hypothesis;
        return out;
    }
    int chosen = -1;
    long best = -1;
    for (int c : r.children) {
        const BlueNode& b = blues_[static_cast<std::size_t>(c)];
        if (!b.proven) continue;
        long s = 1;
        for (int k : b.children) s += pruned_size(k, sizes);
        if (chosen < 0 || s < best) {
            chosen = c;
            best = s;
        }
    }
    if (chosen < 0) throw std::logic_error("red node is not proven");
    const BlueNode& b = blues_[static_cast<std::size_t>(chosen)];
    out.theorem = b.theorem;
    out.substitution = b.substitution;
    for (int k : b.children) out.children.push_back(prune_red(k, sizes));
    return out;
}

ProofNode ProofSearch::prune() const {
    std::lock_guard lock(mu_);
    if (!reds_[0].proven) throw std::logic_error("root is not proven");
    std::vector<long> sizes(reds_.size(), -1);
    return prune_red(0, sizes);
}

SearchResult prove(const Theory& theory, const Context& ctx, GuidanceModel& guidance, const SearchParams& params) {
    ProofSearch search(theory, ctx, guidance, params);
    SearchResult res = search.run();
    if (!res.proved) return res;
    ProofNode proof = search.prune();
    auto tree_report = verify_proof_tree(proof, ctx, theory);
    if (!tree_report) {
        res.proved = false;
        res.failure = "proof tree rejected: " + tree_report.message;
        return res;
    }
    res.rpn = emit_rpn(proof, ctx, theory);
    auto kernel = verify_rpn_proof(res.rpn, theory.db()[ctx.label()], ctx.label(), theory.db());
    if (!kernel) {
        res.proved = false;
        res.failure = "kernel rejected proof: " + kernel.message;
        res.rpn.clear();
        return res;
    }
    res.proof = std::move(proof);
    return res;
}

}  // namespace mmp
