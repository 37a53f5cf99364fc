#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mmp/frame.hpp"
#include "mmp/guidance.hpp"
#include "mmp/unify.hpp"
#include "mmp/verifier.hpp"

namespace mmp {

class Theory;

struct SearchParams {
    double alpha = 1.0;
    double beta = 0.5;
    double gamma = 3.0;
    int child_divisor = 3;
    long pass_limit = 10000;
    double wall_clock_limit = 300;  // seconds
    int beam_width = 5;
    int token_limit = 75;
    int threads = 1;
    std::uint64_t seed = 0;
    std::ostream* trace = nullptr;  // newline-delimited JSON, see docs/trace.md
};

/// x_b/(n_b + γ t_b) + β v_b/n_b + α sqrt(ln n_a / n_b)
double blue_priority(double x_b, long n_b, double v_b, int t_b, long n_a, const SearchParams& params);

/// Number of children a red node with visit count n may have.
long child_allowance(long n, int divisor);

struct ExpansionQueue;

struct RedNode {
    int id = -1;
    ParseTree expression;
    int parent = -1;      // blue id, -1 for the root
    int hypothesis = -1;  // index into e_C when the expression is a context hypothesis
    double y = 0;
    double x = 0;
    long n = 0;
    bool evaluated = false;
    bool proven = false;
    bool dead = false;
    bool expanding = false;
    bool exhausted = false;
    std::vector<int> children;  // live blue children in creation order
    std::vector<ViableTheorem> viable;
    std::unique_ptr<ExpansionQueue> queue;
};

struct BlueNode {
    int id = -1;
    int parent = -1;  // red id
    StatementId theorem = kNoStatement;
    Substitution substitution;
    double v = 0;
    std::vector<int> children;  // red ids, one per hypothesis
    bool dummy = false;         // placeholder for a generation that hit the token limit
    bool proven = false;
    bool dead = false;
    int t = 0;  // passes currently inside this subtree
    double x = 0;
    long n = 0;
    int least = -1;  // red id carrying this node's statistics
};

enum class PassOutcome { evaluated, expanded, dummy_added, dead_end, visited_dummy, busy, finished };

struct SearchResult {
    bool proved = false;
    std::optional<ProofNode> proof;
    std::vector<StatementId> rpn;
    long passes = 0;
    std::size_t red_nodes = 0;
    std::size_t blue_nodes = 0;
    bool root_dead = false;
    bool timed_out = false;
    bool pass_limit = false;
    double seconds = 0;
    std::string failure;  // empty on success
};

/// One search over a partial proof tree rooted at the context's assertion.
///
/// All tree mutation happens under a single mutex; guidance queries run
/// outside it. A red node being expanded is flagged so no second pass
/// expands it concurrently.
class ProofSearch {
public:
    ProofSearch(const Theory& theory, const Context& ctx, GuidanceModel& guidance, SearchParams params);
    ~ProofSearch();

    /// One pass from the root. In single-threaded use never returns `busy`.
    PassOutcome run_pass();
    /// Passes until the root is proven or dead, or a limit is reached.
    SearchResult run();

    bool root_proven() const;
    bool root_dead() const;
    long passes() const;

    /// Snapshot accessors; call only while no pass is running.
    const RedNode& red(int id) const { return reds_[static_cast<std::size_t>(id)]; }
    const BlueNode& blue(int id) const { return blues_[static_cast<std::size_t>(id)]; }
    std::size_t red_count() const { return reds_.size(); }
    std::size_t blue_count() const { return blues_.size(); }
    const SearchParams& params() const { return params_; }

    /// Keep one proven blue child per red node: fewest red nodes, then
    /// earliest creation. Throws std::logic_error if the root is unproven.
    ProofNode prune() const;

    /// Select the child of red `a` to visit: argmax priority among live,
    /// unproven children, ties to the earliest. -1 if none.
    int select_child(const RedNode& a) const;

private:
    struct ChildPlan;
    struct Plan;

    int new_red(ParseTree expr, int parent);
    int attach(const Plan& plan, int parent_red);
    void propagate(const std::vector<int>& reds, const std::vector<int>& blues);
    void recompute_red(RedNode& r);
    void recompute_blue(BlueNode& b);
    Plan plan_expansion(RedNode& a, const std::vector<ParseTree>& ancestors);
    ChildPlan plan_child(const ParseTree& expr);
    std::optional<std::pair<StatementId, Substitution>> last_step(const ParseTree& expr,
                                                                  const std::vector<ViableTheorem>& viable);
    double safe_payoff(const ParseTree& a);
    void trace(const char* action, const std::vector<int>& reds, const std::vector<int>& blues, double value);
    ProofNode prune_red(int id, std::vector<long>& sizes) const;
    long pruned_size(int red, std::vector<long>& sizes) const;

    const Theory& theory_;
    const Context& ctx_;
    GuidanceModel& guidance_;
    SearchParams params_;
    mutable std::mutex mu_;
    std::deque<RedNode> reds_;
    std::deque<BlueNode> blues_;
    long passes_ = 0;
};

/// Build, run and verify a search. Success is reported only when the
/// emitted RPN proof passes verify_rpn_proof.
SearchResult prove(const Theory& theory, const Context& ctx, GuidanceModel& guidance, const SearchParams& params);

}  // namespace mmp
