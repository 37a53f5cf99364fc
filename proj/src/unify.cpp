#include "mmp/unify.hpp"

#include "mmp/theory.hpp"

namespace mmp {

ParseTree apply_substitution(const ParseTree& t, const Substitution& s) {
    if (t.is_variable()) {
        auto it = s.find(t.var());
        if (it == s.end()) return t;
        if (it->second.typecode() != t.typecode())
            throw SubstitutionError("substitution image has the wrong typecode");
        return it->second;
    }
    std::vector<ParseTree> kids;
    kids.reserve(t.children().size());
    bool changed = false;
    for (auto& c : t.children()) {
        kids.push_back(apply_substitution(c, s));
        changed = changed || !kids.back().same_node(c);
    }
    if (!changed) return t;
    return ParseTree::apply(t.constructor(), t.typecode(), std::move(kids));
}

bool match_into(const ParseTree& pattern, const ParseTree& target, Substitution& s) {
    if (pattern.typecode() != target.typecode()) return false;
    if (pattern.is_variable()) {
        auto [it, inserted] = s.emplace(pattern.var(), target);
        return inserted || it->second == target;
    }
    if (target.is_variable() || pattern.constructor() != target.constructor()) return false;
    auto pc = pattern.children();
    auto tc = target.children();
    for (std::size_t i = 0; i < pc.size(); ++i)
        if (!match_into(pc[i], tc[i], s)) return false;
    return true;
}

std::optional<Substitution> match_assertion(const ParseTree& pattern, const ParseTree& target) {
    Substitution s;
    if (!match_into(pattern, target, s)) return std::nullopt;
    return s;
}

bool match_placeholders(const ParseTree& pattern, const ParseTree& target, Substitution& s) {
    if (pattern.typecode() != target.typecode()) return false;
    if (pattern.is_variable()) {
        if (!is_placeholder(pattern.var())) return target.is_variable() && target.var() == pattern.var();
        auto [it, inserted] = s.emplace(pattern.var(), target);
        return inserted || it->second == target;
    }
    if (target.is_variable() || pattern.constructor() != target.constructor()) return false;
    auto pc = pattern.children();
    auto tc = target.children();
    for (std::size_t i = 0; i < pc.size(); ++i)
        if (!match_placeholders(pc[i], tc[i], s)) return false;
    return true;
}

std::vector<ParseTree> partial_hypotheses(const ViableTheorem& v) {
    Substitution s = v.constrained;
    const TheoremFrame& f = *v.frame;
    for (std::size_t k = 0; k < f.unconstrained.size(); ++k) {
        SymbolId u = f.unconstrained[k];
        s[u] = ParseTree::variable(placeholder_symbol(k), f.find_var(u)->typecode);
    }
    std::vector<ParseTree> out;
    for (auto& h : f.hypotheses) out.push_back(apply_substitution(h, s));
    return out;
}

std::optional<Substitution> complete_substitution(const ViableTheorem& v, const Substitution& placeholder_bindings) {
    Substitution s = v.constrained;
    const TheoremFrame& f = *v.frame;
    for (std::size_t k = 0; k < f.unconstrained.size(); ++k) {
        auto it = placeholder_bindings.find(placeholder_symbol(k));
        if (it == placeholder_bindings.end()) return std::nullopt;
        s[f.unconstrained[k]] = it->second;
    }
    return s;
}

bool check_disjoint(const Substitution& s, const std::vector<VarPair>& pairs, const Context& ctx) {
    for (auto& p : pairs) {
        auto x = s.find(p.first);
        auto y = s.find(p.second);
        if (x == s.end() || y == s.end()) continue;
        auto xs = x->second.variables();
        auto ys = y->second.variables();
        for (auto z : xs)
            for (auto w : ys)
                if (z == w || !ctx.is_disjoint(z, w)) return false;
    }
    return true;
}

bool check_disjoint(const Substitution& s, const TheoremFrame& frame, const Context& ctx) {
    return check_disjoint(s, frame.disjoint, ctx);
}

bool well_typed(const Substitution& s, const TheoremFrame& frame, const Context& ctx) {
    for (auto& [v, image] : s) {
        const TypedVar* tv = frame.find_var(v);
        if (!tv || image.empty() || image.typecode() != tv->typecode) return false;
        for (auto w : image.variables()) {
            const TypedVar* cv = ctx.find_var(w);
            if (!cv) return false;
        }
    }
    return true;
}

std::vector<ViableTheorem> viable_theorems(const ParseTree& a, const Context& ctx, const Theory& theory) {
    std::vector<ViableTheorem> out;
    for (const TheoremFrame* f : theory.candidates(a)) {
        if (f->position() >= ctx.position()) break;
        Substitution s;
        if (!match_into(f->assertion, a, s)) continue;
        if (!check_disjoint(s, *f, ctx)) continue;
        out.push_back({f, std::move(s)});
    }
    return out;
}

}  // namespace mmp
