#include "mmp/frame.hpp"

#include <algorithm>

namespace mmp {

bool TheoremFrame::is_constrained(SymbolId v) const {
    return std::find(constrained.begin(), constrained.end(), v) != constrained.end();
}

const TypedVar* TheoremFrame::find_var(SymbolId v) const {
    for (auto& tv : free_vars)
        if (tv.var == v) return &tv;
    return nullptr;
}

bool Context::is_disjoint(SymbolId a, SymbolId b) const {
    return std::binary_search(disjoint.begin(), disjoint.end(), VarPair::of(a, b));
}

const TypedVar* Context::find_var(SymbolId v) const {
    for (auto& tv : available_vars)
        if (tv.var == v) return &tv;
    return nullptr;
}

int Context::hypothesis_index(const ParseTree& t) const {
    for (std::size_t i = 0; i < frame.hypotheses.size(); ++i)
        if (frame.hypotheses[i] == t) return static_cast<int>(i);
    return -1;
}

TheoremFrame frame_of(StatementId label, const Database& db, const Grammar& grammar) {
    if (label < 0 || static_cast<std::size_t>(label) >= db.size()) throw FrameError("unknown statement id");
    const Statement& st = db[label];
    if (!st.is_assertion()) throw FrameError("'" + st.label + "' is not an axiom or proposition");
    if (st.typecode != db.provable_typecode())
        throw FrameError("'" + st.label + "' has typecode '" + db.name(st.typecode) + "', not the provable typecode");

    TheoremFrame f;
    f.label = label;
    f.is_axiom = st.kind == StatementKind::axiom;
    VariableTyping typing;
    for (auto h : st.mandatory) {
        const Statement& hs = db[h];
        if (hs.kind == StatementKind::floating) {
            f.free_vars.push_back({hs.body[0], hs.typecode, h});
            typing[hs.body[0]] = hs.typecode;
        }
    }
    f.assertion = grammar.parse_statement(st, typing);
    for (auto h : st.mandatory) {
        const Statement& hs = db[h];
        if (hs.kind != StatementKind::essential) continue;
        if (hs.typecode != db.provable_typecode())
            throw FrameError("'" + st.label + "' has a hypothesis of non-provable type");
        f.hypotheses.push_back(grammar.parse_statement(hs, typing));
        f.hypothesis_labels.push_back(h);
    }
    f.disjoint = st.mandatory_dv;
    std::sort(f.disjoint.begin(), f.disjoint.end());
    for (auto& tv : f.free_vars) {
        if (f.assertion.contains_variable(tv.var)) f.constrained.push_back(tv.var);
        else f.unconstrained.push_back(tv.var);
    }
    return f;
}

TheoremFrame frame_of(std::string_view label, const Database& db, const Grammar& grammar) {
    auto id = db.find(label);
    if (!id) throw FrameError("unknown label '" + std::string(label) + "'");
    return frame_of(*id, db, grammar);
}

Context context_of(StatementId label, const Database& db, const Grammar& grammar) {
    Context ctx;
    ctx.frame = frame_of(label, db, grammar);
    const Statement& st = db[label];
    for (auto f : st.active_floats) ctx.available_vars.push_back({db[f].body[0], db[f].typecode, f});
    ctx.disjoint = st.active_dv;
    std::sort(ctx.disjoint.begin(), ctx.disjoint.end());
    return ctx;
}

}  // namespace mmp
