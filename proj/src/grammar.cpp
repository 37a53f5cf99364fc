#include "mmp/grammar.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace mmp {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

}  // namespace

ParseTree ParseTree::variable(SymbolId var, SymbolId typecode) {
    ParseTree t;
    std::size_t h = mix(mix(0x51ed27, static_cast<std::size_t>(var)), static_cast<std::size_t>(typecode));
    t.node_ = std::make_shared<const Node>(Node{var, typecode, true, {}, h, 1, 0});
    return t;
}

ParseTree ParseTree::apply(StatementId constructor, SymbolId typecode, std::vector<ParseTree> children) {
    std::size_t h = mix(mix(0xc0ffee, static_cast<std::size_t>(constructor)), static_cast<std::size_t>(typecode));
    std::size_t size = 1, depth = 0;
    for (auto& c : children) {
        h = mix(h, c.hash());
        size += c.size();
        depth = std::max(depth, c.depth() + 1);
    }
    ParseTree t;
    t.node_ = std::make_shared<const Node>(Node{constructor, typecode, false, std::move(children), h, size, depth});
    return t;
}

bool operator==(const ParseTree& a, const ParseTree& b) {
    if (a.node_ == b.node_) return true;
    if (!a.node_ || !b.node_) return false;
    if (a.node_->hash != b.node_->hash || a.node_->size != b.node_->size || a.node_->head != b.node_->head ||
        a.node_->is_var != b.node_->is_var || a.node_->typecode != b.node_->typecode)
        return false;
    const auto& ca = a.node_->children;
    const auto& cb = b.node_->children;
    if (ca.size() != cb.size()) return false;
    for (std::size_t i = 0; i < ca.size(); ++i)
        if (!(ca[i] == cb[i])) return false;
    return true;
}

std::vector<SymbolId> ParseTree::variables() const {
    std::vector<SymbolId> out;
    std::vector<const ParseTree*> stack{this};
    while (!stack.empty()) {
        const ParseTree* t = stack.back();
        stack.pop_back();
        if (t->is_variable()) {
            if (std::find(out.begin(), out.end(), t->var()) == out.end()) out.push_back(t->var());
            continue;
        }
        auto kids = t->children();
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(&*it);
    }
    return out;
}

bool ParseTree::contains_variable(SymbolId v) const {
    if (is_variable()) return var() == v;
    for (auto& c : children())
        if (c.contains_variable(v)) return true;
    return false;
}

VariableTyping scope_typing(const Database& db, StatementId at) {
    VariableTyping out;
    for (auto f : db[at].active_floats) out[db[f].body[0]] = db[f].typecode;
    return out;
}

Grammar::Grammar(const Database& db) : db_(&db) {
    SymbolId provable = db.provable_typecode();
    std::set<SymbolId> types;
    for (std::size_t i = 0; i < db.size(); ++i) {
        const Statement& st = db.statements()[i];
        if (st.kind == StatementKind::floating) types.insert(st.typecode);
        if (st.kind != StatementKind::axiom || st.typecode == provable) continue;
        Production p;
        p.label = static_cast<StatementId>(i);
        p.typecode = st.typecode;
        p.body = st.body;
        std::unordered_map<SymbolId, SymbolId> typing;
        for (auto h : st.mandatory) {
            const Statement& hs = db[h];
            if (hs.kind == StatementKind::essential)
                throw GrammarError(GrammarError::Kind::unsupported,
                                   "constructor '" + st.label + "' has essential hypotheses");
            typing[hs.body[0]] = hs.typecode;
        }
        for (auto s : st.body) {
            if (!db.is_variable(s)) {
                p.slot_at.push_back(-1);
                continue;
            }
            if (std::find(p.slot_vars.begin(), p.slot_vars.end(), s) != p.slot_vars.end())
                throw GrammarError(GrammarError::Kind::unsupported,
                                   "constructor '" + st.label + "' repeats a variable");
            p.slot_at.push_back(static_cast<int>(p.slot_vars.size()));
            p.slot_vars.push_back(s);
            p.slot_types.push_back(typing.at(s));
        }
        for (auto h : st.mandatory) {
            auto it = std::find(p.slot_vars.begin(), p.slot_vars.end(), db[h].body[0]);
            p.mandatory_slots.push_back(static_cast<int>(it - p.slot_vars.begin()));
        }
        types.insert(p.typecode);
        by_label_[p.label] = productions_.size();
        by_type_[p.typecode].push_back(productions_.size());
        productions_.push_back(std::move(p));
    }
    types.erase(provable);
    typecodes_.assign(types.begin(), types.end());

    // Left recursion check on the leftmost-slot graph.
    std::map<SymbolId, std::set<SymbolId>> left;
    for (auto& p : productions_)
        if (!p.slot_at.empty() && p.slot_at[0] >= 0) left[p.typecode].insert(p.slot_types[static_cast<std::size_t>(p.slot_at[0])]);
    for (auto t : typecodes_) {
        std::set<SymbolId> seen;
        std::vector<SymbolId> todo(left[t].begin(), left[t].end());
        while (!todo.empty()) {
            auto u = todo.back();
            todo.pop_back();
            if (u == t)
                throw GrammarError(GrammarError::Kind::unsupported,
                                   "grammar is left-recursive in typecode '" + db.name(t) + "'");
            if (!seen.insert(u).second) continue;
            for (auto w : left[u]) todo.push_back(w);
        }
    }

    // The logical typecode is the one provable statements parse as.
    std::map<SymbolId, int> votes;
    int tried = 0;
    for (std::size_t i = 0; i < db.size() && tried < 50; ++i) {
        const Statement& st = db.statements()[i];
        if (!st.is_assertion() || st.typecode != provable) continue;
        ++tried;
        auto typing = scope_typing(db, static_cast<StatementId>(i));
        for (auto t : typecodes_) {
            try {
                parse_as(t, st.body, typing);
                ++votes[t];
            } catch (const GrammarError&) {
            }
        }
    }
    if (!votes.empty())
        logical_ = std::max_element(votes.begin(), votes.end(), [](auto& a, auto& b) { return a.second < b.second; })
                       ->first;
}

std::vector<const Production*> Grammar::productions_of(SymbolId typecode) const {
    std::vector<const Production*> out;
    auto it = by_type_.find(typecode);
    if (it != by_type_.end())
        for (auto i : it->second) out.push_back(&productions_[i]);
    return out;
}

const Production* Grammar::production(StatementId label) const {
    auto it = by_label_.find(label);
    return it == by_label_.end() ? nullptr : &productions_[it->second];
}

namespace {

/// Memoized all-parses chart over (typecode, start). Each cell keeps one tree
/// per end position plus a flag recording whether a second, different
/// derivation of the same span was seen.
class ChartParser {
public:
    ChartParser(const Grammar& g, std::map<SymbolId, std::vector<std::size_t>> const* by_type,
                std::span<const Production> prods, std::span<const SymbolId> input, const VariableTyping& vars)
        : g_(g), by_type_(by_type), prods_(prods), in_(input), vars_(vars) {}

    struct Item {
        std::size_t end;
        ParseTree tree;
        bool ambiguous;
    };

    const std::vector<Item>& spans(SymbolId type, std::size_t pos) {
        std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(type)) << 32) | pos;
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (!active_.insert(key).second)
            throw GrammarError(GrammarError::Kind::unsupported, "left recursion while parsing");
        std::vector<Item> items;
        auto add = [&](std::size_t end, ParseTree t, bool amb) {
            for (auto& it : items)
                if (it.end == end) {
                    if (!(it.tree == t)) it.ambiguous = true;
                    it.ambiguous = it.ambiguous || amb;
                    return;
                }
            items.push_back({end, std::move(t), amb});
        };
        if (pos < in_.size()) {
            auto v = vars_.find(in_[pos]);
            if (v != vars_.end() && v->second == type) add(pos + 1, ParseTree::variable(in_[pos], type), false);
        }
        if (auto bt = by_type_->find(type); bt != by_type_->end()) {
            for (auto pi : bt->second) {
                const Production& p = prods_[pi];
                std::vector<ParseTree> kids(p.slot_vars.size());
                match(p, 0, pos, kids, false, add);
            }
        }
        active_.erase(key);
        return memo_.emplace(key, std::move(items)).first->second;
    }

private:
    template <class Add>
    void match(const Production& p, std::size_t k, std::size_t pos, std::vector<ParseTree>& kids, bool amb, Add& add) {
        if (k == p.body.size()) {
            add(pos, ParseTree::apply(p.label, p.typecode, kids), amb);
            return;
        }
        if (pos >= in_.size()) return;
        int slot = p.slot_at[k];
        if (slot < 0) {
            if (in_[pos] == p.body[k]) match(p, k + 1, pos + 1, kids, amb, add);
            return;
        }
        // copy: recursive calls may grow the memo table
        auto items = spans(p.slot_types[static_cast<std::size_t>(slot)], pos);
        for (auto& it : items) {
            kids[static_cast<std::size_t>(slot)] = it.tree;
            match(p, k + 1, it.end, kids, amb || it.ambiguous, add);
        }
    }

    const Grammar& g_;
    std::map<SymbolId, std::vector<std::size_t>> const* by_type_;
    std::span<const Production> prods_;
    std::span<const SymbolId> in_;
    const VariableTyping& vars_;
    std::unordered_map<std::uint64_t, std::vector<Item>> memo_;
    std::unordered_set<std::uint64_t> active_;
};

}  // namespace

ParseTree Grammar::parse_as(SymbolId typecode, std::span<const SymbolId> body, const VariableTyping& vars) const {
    ChartParser chart(*this, &by_type_, productions_, body, vars);
    for (auto& it : chart.spans(typecode, 0)) {
        if (it.end != body.size()) continue;
        if (it.ambiguous)
            throw GrammarError(GrammarError::Kind::ambiguous,
                               "ambiguous parse of '" + db_->render(typecode, body) + "'");
        return it.tree;
    }
    throw GrammarError(GrammarError::Kind::no_parse, "no parse for '" + db_->render(typecode, body) + "'");
}

ParseTree Grammar::parse(std::span<const SymbolId> symbols, const VariableTyping& vars) const {
    if (symbols.empty()) throw GrammarError(GrammarError::Kind::no_parse, "empty expression");
    return parse_as(symbols[0], symbols.subspan(1), vars);
}

ParseTree Grammar::parse_statement(const Statement& st, const VariableTyping& vars) const {
    SymbolId t = st.typecode == db_->provable_typecode() ? logical_ : st.typecode;
    if (st.kind == StatementKind::floating) return ParseTree::variable(st.body[0], st.typecode);
    return parse_as(t, st.body, vars);
}

void Grammar::render_body(const ParseTree& t, std::vector<SymbolId>& out) const {
    if (t.is_variable()) {
        out.push_back(t.var());
        return;
    }
    const Production* p = production(t.constructor());
    if (!p) {
        // Derived syntax (a non-provable proposition): render via its body.
        const Statement& st = (*db_)[t.constructor()];
        std::vector<SymbolId> vars;
        for (auto h : st.mandatory) vars.push_back((*db_)[h].body[0]);
        for (auto s : st.body) {
            auto it = std::find(vars.begin(), vars.end(), s);
            if (it == vars.end()) out.push_back(s);
            else render_body(t.child(static_cast<std::size_t>(it - vars.begin())), out);
        }
        return;
    }
    for (std::size_t k = 0; k < p->body.size(); ++k) {
        int slot = p->slot_at[k];
        if (slot < 0) out.push_back(p->body[k]);
        else render_body(t.child(static_cast<std::size_t>(slot)), out);
    }
}

std::vector<SymbolId> Grammar::render(const ParseTree& t) const {
    std::vector<SymbolId> out{t.typecode()};
    render_body(t, out);
    return out;
}

std::string Grammar::to_string(const ParseTree& t) const {
    auto syms = render(t);
    return db_->render(syms[0], std::span<const SymbolId>(syms).subspan(1));
}

}  // namespace mmp
