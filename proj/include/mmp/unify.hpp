#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mmp/frame.hpp"
#include "mmp/grammar.hpp"

namespace mmp {

class Theory;

/// Variable to expression. Ordered so that iteration is deterministic.
using Substitution = std::map<SymbolId, ParseTree>;

class SubstitutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Replace every bound variable of `t` by its image; unbound variables are
/// left as terminals. Throws SubstitutionError if an image has the wrong typecode.
ParseTree apply_substitution(const ParseTree& t, const Substitution& s);

/// Extend `s` so that apply_substitution(pattern, s) == target. Variables of
/// the pattern already bound in `s` must agree. Returns false (with `s`
/// possibly partially extended) when no such extension exists.
bool match_into(const ParseTree& pattern, const ParseTree& target, Substitution& s);

/// The unique substitution mapping `pattern` onto `target`, if any.
std::optional<Substitution> match_assertion(const ParseTree& pattern, const ParseTree& target);

/// Disjointness condition for the pairs of `pairs` whose both variables are
/// bound in `s`: every context variable of s(x) and of s(y) must form a
/// distinct pair listed in the context's $d set.
bool check_disjoint(const Substitution& s, const std::vector<VarPair>& pairs, const Context& ctx);
bool check_disjoint(const Substitution& s, const TheoremFrame& frame, const Context& ctx);

/// Whether every variable in the images of `s` is available in the context
/// with a matching typecode, and every image has its variable's typecode.
bool well_typed(const Substitution& s, const TheoremFrame& frame, const Context& ctx);

/// Placeholder leaves stand for unconstrained variables while the rest of a
/// substitution is known. Their ids are negative so they never collide with
/// database symbols.
inline SymbolId placeholder_symbol(std::size_t k) { return -2 - static_cast<SymbolId>(k); }
inline bool is_placeholder(SymbolId v) { return v <= -2; }

/// Like match_into, but only placeholder leaves of `pattern` may be bound;
/// every other variable leaf must appear verbatim in `target`.
bool match_placeholders(const ParseTree& pattern, const ParseTree& target, Substitution& s);

struct ViableTheorem {
    const TheoremFrame* frame = nullptr;
    Substitution constrained;
};

/// Hypotheses of a viable theorem with the constrained substitution applied
/// and the k-th unconstrained variable replaced by placeholder_symbol(k).
std::vector<ParseTree> partial_hypotheses(const ViableTheorem& v);

/// Complete a substitution from placeholder bindings; nullopt if some
/// placeholder is unbound.
std::optional<Substitution> complete_substitution(const ViableTheorem& v, const Substitution& placeholder_bindings);

/// Theorems before the context whose assertion matches `a` and whose forced
/// substitution respects the $d pairs among constrained variables. Database order.
std::vector<ViableTheorem> viable_theorems(const ParseTree& a, const Context& ctx, const Theory& theory);

}  // namespace mmp
