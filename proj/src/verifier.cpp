#include "mmp/verifier.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mmp/theory.hpp"

namespace mmp {

std::size_t ProofNode::size() const {
    std::size_t n = 1;
    for (auto& c : children) n += c.size();
    return n;
}

namespace {

VerifyReport fail(std::string message, std::vector<int> path = {}) {
    VerifyReport r;
    r.ok = false;
    r.message = std::move(message);
    r.path = std::move(path);
    return r;
}

void check_node(const ProofNode& node, const Context& ctx, const Theory& theory, std::vector<int>& path,
                VerifyReport& report) {
    const Database& db = theory.db();
    if (node.is_leaf()) {
        int idx = node.hypothesis >= 0 && static_cast<std::size_t>(node.hypothesis) < ctx.hypotheses().size() &&
                          ctx.hypotheses()[static_cast<std::size_t>(node.hypothesis)] == node.expression
                      ? node.hypothesis
                      : ctx.hypothesis_index(node.expression);
        if (idx < 0) report = fail("leaf is not a hypothesis of the context", path);
        return;
    }
    const TheoremFrame* f = theory.frame(node.theorem);
    if (!f) {
        report = fail("unknown theorem", path);
        return;
    }
    const std::string& name = db.label(node.theorem);
    if (f->position() >= ctx.position()) {
        report = fail("forward reference to '" + name + "'", path);
        return;
    }
    if (node.substitution.size() != f->free_vars.size()) {
        report = fail("substitution for '" + name + "' does not bind exactly its free variables", path);
        return;
    }
    for (auto& tv : f->free_vars)
        if (!node.substitution.count(tv.var)) {
            report = fail("substitution for '" + name + "' misses a variable", path);
            return;
        }
    if (!well_typed(node.substitution, *f, ctx)) {
        report = fail("ill-typed substitution for '" + name + "'", path);
        return;
    }
    if (!(apply_substitution(f->assertion, node.substitution) == node.expression)) {
        report = fail("'" + name + "' under its substitution does not yield the node expression", path);
        return;
    }
    if (node.children.size() != f->hypotheses.size()) {
        report = fail("'" + name + "' needs " + std::to_string(f->hypotheses.size()) + " hypothesis children", path);
        return;
    }
    if (!check_disjoint(node.substitution, *f, ctx)) {
        report = fail("disjoint variable violation in '" + name + "'", path);
        return;
    }
    for (std::size_t i = 0; i < f->hypotheses.size(); ++i) {
        path.push_back(static_cast<int>(i));
        if (!(apply_substitution(f->hypotheses[i], node.substitution) == node.children[i].expression)) {
            report = fail("child does not match hypothesis of '" + name + "'", path);
            return;
        }
        check_node(node.children[i], ctx, theory, path, report);
        if (!report.ok) return;
        path.pop_back();
    }
}

using Expr = std::vector<SymbolId>;

}  // namespace

VerifyReport verify_proof_tree(const ProofNode& root, const Context& ctx, const Theory& theory) {
    if (!(root.expression == ctx.assertion())) return fail("root expression differs from the assertion");
    VerifyReport report;
    std::vector<int> path;
    check_node(root, ctx, theory, path, report);
    return report;
}

VerifyReport verify_rpn_proof(const std::vector<StatementId>& labels, const Statement& prop, StatementId prop_id,
                              const Database& db) {
    std::vector<Expr> stack;
    std::vector<std::span<const SymbolId>> subst(db.symbol_count());
    std::vector<char> bound(db.symbol_count(), 0);
    for (std::size_t step = 0; step < labels.size(); ++step) {
        StatementId id = labels[step];
        if (id < 0 || static_cast<std::size_t>(id) >= db.size()) return fail("bad label id at step " + std::to_string(step));
        const Statement& st = db[id];
        if (id >= prop_id) return fail("step " + std::to_string(step) + " refers forward to '" + st.label + "'");
        if (st.is_hypothesis()) {
            if (!db.hypothesis_active(id, prop_id))
                return fail("step " + std::to_string(step) + " uses inactive hypothesis '" + st.label + "'");
            Expr e{st.typecode};
            e.insert(e.end(), st.body.begin(), st.body.end());
            stack.push_back(std::move(e));
            continue;
        }
        if (!st.is_assertion()) return fail("step " + std::to_string(step) + " is not a hypothesis or assertion");
        if (stack.size() < st.mandatory.size())
            return fail("stack underflow at step " + std::to_string(step) + " ('" + st.label + "')");
        std::size_t base = stack.size() - st.mandatory.size();
        std::vector<SymbolId> touched;
        auto clear = [&] {
            for (auto v : touched) bound[static_cast<std::size_t>(v)] = 0;
        };
        for (std::size_t i = 0; i < st.mandatory.size(); ++i) {
            const Statement& h = db[st.mandatory[i]];
            if (h.kind != StatementKind::floating) continue;
            const Expr& e = stack[base + i];
            if (e.empty() || e[0] != h.typecode) {
                clear();
                return fail("typecode mismatch for '" + h.label + "' in '" + st.label + "' at step " +
                            std::to_string(step));
            }
            auto v = static_cast<std::size_t>(h.body[0]);
            subst[v] = std::span<const SymbolId>(e).subspan(1);
            bound[v] = 1;
            touched.push_back(h.body[0]);
        }
        auto substitute = [&](SymbolId type, const std::vector<SymbolId>& body) {
            Expr out{type};
            for (auto s : body) {
                auto u = static_cast<std::size_t>(s);
                if (bound[u]) out.insert(out.end(), subst[u].begin(), subst[u].end());
                else out.push_back(s);
            }
            return out;
        };
        for (std::size_t i = 0; i < st.mandatory.size(); ++i) {
            const Statement& h = db[st.mandatory[i]];
            if (h.kind != StatementKind::essential) continue;
            if (substitute(h.typecode, h.body) != stack[base + i]) {
                clear();
                return fail("hypothesis '" + h.label + "' of '" + st.label + "' not matched at step " +
                            std::to_string(step));
            }
        }
        for (auto& p : st.mandatory_dv) {
            for (auto z : subst[static_cast<std::size_t>(p.first)]) {
                if (!db.is_variable(z)) continue;
                for (auto w : subst[static_cast<std::size_t>(p.second)]) {
                    if (!db.is_variable(w)) continue;
                    if (z == w || !std::binary_search(prop.active_dv.begin(), prop.active_dv.end(), VarPair::of(z, w))) {
                        clear();
                        return fail("disjoint variable violation (" + db.name(z) + ", " + db.name(w) + ") in '" +
                                    st.label + "' at step " + std::to_string(step));
                    }
                }
            }
        }
        Expr result = substitute(st.typecode, st.body);
        clear();
        stack.resize(base);
        stack.push_back(std::move(result));
    }
    if (stack.size() != 1) return fail("proof leaves " + std::to_string(stack.size()) + " entries on the stack");
    Expr want{prop.typecode};
    want.insert(want.end(), prop.body.begin(), prop.body.end());
    if (stack[0] != want) return fail("proof proves '" + db.render(stack[0][0], std::span(stack[0]).subspan(1)) + "'");
    return {};
}

VerifyReport verify_proposition(StatementId prop_id, const Database& db) {
    const Statement& st = db[prop_id];
    if (st.kind != StatementKind::proposition) return fail("'" + st.label + "' is not a proposition");
    std::vector<StatementId> labels;
    try {
        labels = decompress_proof(st, db);
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return verify_rpn_proof(labels, st, prop_id, db);
}

ProofNode tree_from_rpn(const std::vector<StatementId>& labels, const Context& ctx, const Theory& theory) {
    const Database& db = theory.db();
    struct Entry {
        bool provable = false;
        ParseTree tree;
        ProofNode node;
    };
    std::vector<Entry> stack;
    std::unordered_map<StatementId, ParseTree> syntax_patterns;
    for (StatementId id : labels) {
        const Statement& st = db[id];
        if (st.kind == StatementKind::floating) {
            stack.push_back({false, ParseTree::variable(st.body[0], st.typecode), {}});
            continue;
        }
        if (st.kind == StatementKind::essential) {
            auto it = std::find(ctx.frame.hypothesis_labels.begin(), ctx.frame.hypothesis_labels.end(), id);
            if (it == ctx.frame.hypothesis_labels.end())
                throw std::runtime_error("'" + st.label + "' is not a hypothesis of the context");
            Entry e;
            e.provable = true;
            e.node.hypothesis = static_cast<int>(it - ctx.frame.hypothesis_labels.begin());
            e.node.expression = ctx.hypotheses()[static_cast<std::size_t>(e.node.hypothesis)];
            stack.push_back(std::move(e));
            continue;
        }
        if (!st.is_assertion()) throw std::runtime_error("'" + st.label + "' cannot appear in a proof");
        if (stack.size() < st.mandatory.size()) throw std::runtime_error("stack underflow at '" + st.label + "'");
        std::size_t base = stack.size() - st.mandatory.size();
        Substitution s;
        std::vector<ProofNode> kids;
        for (std::size_t i = 0; i < st.mandatory.size(); ++i) {
            const Statement& h = db[st.mandatory[i]];
            Entry& e = stack[base + i];
            if (h.kind == StatementKind::floating) {
                if (e.provable) throw std::runtime_error("provable entry bound to a variable in '" + st.label + "'");
                s[h.body[0]] = e.tree;
            } else {
                if (!e.provable) throw std::runtime_error("syntax entry used as hypothesis of '" + st.label + "'");
                kids.push_back(std::move(e.node));
            }
        }
        stack.resize(base);
        Entry out;
        if (st.typecode == db.provable_typecode()) {
            const TheoremFrame* f = theory.frame(id);
            out.provable = true;
            out.node.expression = apply_substitution(f->assertion, s);
            out.node.theorem = id;
            out.node.substitution = std::move(s);
            out.node.children = std::move(kids);
        } else {
            auto it = syntax_patterns.find(id);
            if (it == syntax_patterns.end())
                it = syntax_patterns.emplace(id, theory.grammar().parse_statement(st, scope_typing(db, id))).first;
            out.tree = apply_substitution(it->second, s);
        }
        stack.push_back(std::move(out));
    }
    if (stack.size() != 1 || !stack[0].provable) throw std::runtime_error("proof does not end in a single provable step");
    return std::move(stack[0].node);
}

void emit_syntax(const ParseTree& t, const Context& ctx, const Theory& theory, std::vector<StatementId>& out) {
    if (t.is_variable()) {
        const TypedVar* tv = ctx.find_var(t.var());
        if (!tv) throw std::runtime_error("variable '" + theory.db().name(t.var()) + "' has no active $f");
        out.push_back(tv->float_label);
        return;
    }
    const Production* p = theory.grammar().production(t.constructor());
    if (!p) throw std::runtime_error("tree node is not a constructor");
    for (int slot : p->mandatory_slots) emit_syntax(t.child(static_cast<std::size_t>(slot)), ctx, theory, out);
    out.push_back(p->label);
}

namespace {

void emit_node(const ProofNode& node, const Context& ctx, const Theory& theory, std::vector<StatementId>& out) {
    if (node.is_leaf()) {
        int idx = node.hypothesis >= 0 ? node.hypothesis : ctx.hypothesis_index(node.expression);
        out.push_back(ctx.frame.hypothesis_labels.at(static_cast<std::size_t>(idx)));
        return;
    }
    const Database& db = theory.db();
    std::size_t k = 0;
    for (auto h : db[node.theorem].mandatory) {
        const Statement& hs = db[h];
        if (hs.kind == StatementKind::floating) emit_syntax(node.substitution.at(hs.body[0]), ctx, theory, out);
        else emit_node(node.children.at(k++), ctx, theory, out);
    }
    out.push_back(node.theorem);
}

}  // namespace

std::vector<StatementId> emit_rpn(const ProofNode& root, const Context& ctx, const Theory& theory) {
    std::vector<StatementId> out;
    emit_node(root, ctx, theory, out);
    return out;
}

ProofBlock write_proof_block(const ProofNode& root, const Context& ctx, const Theory& theory) {
    const Database& db = theory.db();
    auto rpn = emit_rpn(root, ctx, theory);
    auto fresh = [&](const std::string& base) {
        std::string l = base;
        for (int k = 2; db.find(l); ++k) l = base + "_" + std::to_string(k);
        return l;
    };
    ProofBlock block;
    block.label = fresh(db.label(ctx.label()) + ".auto");

    std::set<SymbolId> global_vars;
    for (auto& st : db.statements())
        if (st.kind == StatementKind::variable && st.depth == 0) global_vars.insert(st.body.begin(), st.body.end());

    // Variables used: those of the statement and those introduced in the proof.
    std::vector<StatementId> floats;
    auto use_float = [&](StatementId f) {
        if (std::find(floats.begin(), floats.end(), f) == floats.end()) floats.push_back(f);
    };
    for (auto& tv : ctx.frame.free_vars) use_float(tv.float_label);
    for (auto id : rpn)
        if (db[id].kind == StatementKind::floating) use_float(id);
    std::sort(floats.begin(), floats.end());

    std::unordered_map<StatementId, std::string> rename;
    std::ostringstream out;
    out << "\n${\n";
    std::vector<SymbolId> redeclare;
    for (auto f : floats)
        if (!global_vars.count(db[f].body[0])) redeclare.push_back(db[f].body[0]);
    if (!redeclare.empty()) {
        out << "  $v";
        for (auto v : redeclare) out << ' ' << db.name(v);
        out << " $.\n";
    }
    int fi = 0;
    for (auto f : floats) {
        if (db[f].depth == 0) continue;
        std::string l = fresh(block.label + ".f" + std::to_string(++fi));
        rename[f] = l;
        out << "  " << l << " $f " << db.name(db[f].typecode) << ' ' << db.name(db[f].body[0]) << " $.\n";
    }
    std::set<SymbolId> used;
    for (auto f : floats) used.insert(db[f].body[0]);
    for (auto& p : ctx.disjoint)
        if (used.count(p.first) && used.count(p.second))
            out << "  $d " << db.name(p.first) << ' ' << db.name(p.second) << " $.\n";
    for (std::size_t i = 0; i < ctx.frame.hypothesis_labels.size(); ++i) {
        StatementId h = ctx.frame.hypothesis_labels[i];
        std::string l = fresh(block.label + ".e" + std::to_string(i + 1));
        rename[h] = l;
        out << "  " << l << " $e " << db.render(db[h].typecode, db[h].body) << " $.\n";
    }
    const Statement& st = db[ctx.label()];
    out << "  " << block.label << " $p " << db.render(st.typecode, st.body) << " $=";
    int col = 0;
    for (auto id : rpn) {
        auto it = rename.find(id);
        const std::string& l = it == rename.end() ? db.label(id) : it->second;
        if (col > 0 && col + l.size() > 72) {
            out << "\n   ";
            col = 0;
        }
        out << ' ' << l;
        col += static_cast<int>(l.size()) + 1;
    }
    out << " $.\n$}\n";
    block.text = out.str();
    return block;
}

VerifyReport recheck_proof_block(const std::string& source, const ProofBlock& block) {
    Database db;
    try {
        db = Database::parse(source + block.text);
    } catch (const std::exception& e) {
        return fail(std::string("appended block does not parse: ") + e.what());
    }
    auto id = db.find(block.label);
    if (!id) return fail("appended block lacks '" + block.label + "'");
    return verify_proposition(*id, db);
}

}  // namespace mmp
