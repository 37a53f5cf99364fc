#include "mmp/tokens.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mmp/digest.hpp"

namespace mmp {

namespace {

const char* const kSpecialNames[kSpecialCount] = {"<EOH>", "<EOS>", "<START>", "<UV>", "<TARGET>"};

void emit(const ParseTree& t, int depth, int parent_degree, int position, const Renaming& renaming,
          const TokenVocabulary& vocab, const Database& db, TokenSequence& out) {
    int degree = static_cast<int>(t.children().size());
    if (t.is_variable()) {
        auto it = renaming.find(t.var());
        if (it == renaming.end()) throw TokenError("no dummy for variable '" + db.name(t.var()) + "'");
        out.tokens.push_back(it->second);
    } else {
        TokenId id = vocab.constructor(db.label(t.constructor()));
        if (id < 0) throw TokenError("constructor '" + db.label(t.constructor()) + "' not in vocabulary");
        out.tokens.push_back(id);
    }
    out.features.push_back({depth, degree, parent_degree, position});
    for (int i = 0; i < degree; ++i)
        emit(t.child(static_cast<std::size_t>(i)), depth + 1, degree, i, renaming, vocab, db, out);
}

}  // namespace

TokenVocabulary TokenVocabulary::build(const Grammar& grammar, const std::map<SymbolId, int>& dummy_counts) {
    const Database& db = grammar.database();
    TokenVocabulary v;
    for (auto* s : kSpecialNames) v.names_.emplace_back(s);
    for (auto& p : grammar.productions()) v.names_.push_back(db.label(p.label));
    for (auto& [type, count] : dummy_counts)
        for (int k = 1; k <= count; ++k) v.names_.push_back(db.name(type) + "#" + std::to_string(k));
    v.index();
    return v;
}

TokenVocabulary TokenVocabulary::build(const Grammar& grammar, int slack) {
    const Database& db = grammar.database();
    std::map<SymbolId, int> counts;
    for (auto t : grammar.typecodes()) counts[t] = 0;
    for (auto id : db.provable_assertions()) {
        std::map<SymbolId, int> here;
        for (auto h : db[id].mandatory)
            if (db[h].kind == StatementKind::floating) ++here[db[h].typecode];
        for (auto& [t, c] : here) counts[t] = std::max(counts[t], c);
    }
    for (auto& [t, c] : counts) c += slack;
    return build(grammar, counts);
}

void TokenVocabulary::index() {
    ids_.clear();
    dummy_counts_.clear();
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (!ids_.emplace(names_[i], static_cast<TokenId>(i)).second)
            throw TokenError("duplicate token '" + names_[i] + "'");
        if (i < kSpecialCount) {
            if (names_[i] != kSpecialNames[i]) throw TokenError("vocabulary must start with the special tokens");
            continue;
        }
        auto hash = names_[i].rfind('#');
        if (hash != std::string::npos) {
            auto& c = dummy_counts_[names_[i].substr(0, hash)];
            c = std::max(c, std::stoi(names_[i].substr(hash + 1)));
        }
    }
    if (names_.size() < kSpecialCount) throw TokenError("vocabulary must start with the special tokens");
}

TokenVocabulary TokenVocabulary::from_text(std::string_view text) {
    TokenVocabulary v;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        v.names_.push_back(line);
    }
    v.index();
    return v;
}

TokenVocabulary TokenVocabulary::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TokenError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

std::string TokenVocabulary::text() const {
    std::string out;
    for (auto& n : names_) {
        out += n;
        out += '\n';
    }
    return out;
}

void TokenVocabulary::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TokenError("cannot write " + path.string());
    out << text();
}

std::string TokenVocabulary::hash() const { return sha256_hex(text()); }

TokenId TokenVocabulary::id(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    return it == ids_.end() ? -1 : it->second;
}

TokenId TokenVocabulary::constructor(std::string_view label) const {
    TokenId t = id(label);
    return t >= kSpecialCount && !is_dummy(t) ? t : -1;
}

TokenId TokenVocabulary::dummy(std::string_view typecode, int k) const {
    return id(std::string(typecode) + "#" + std::to_string(k));
}

int TokenVocabulary::dummy_count(std::string_view typecode) const {
    auto it = dummy_counts_.find(typecode);
    return it == dummy_counts_.end() ? 0 : it->second;
}

bool TokenVocabulary::is_dummy(TokenId id) const {
    return id >= kSpecialCount && static_cast<std::size_t>(id) < names_.size() &&
           names_[static_cast<std::size_t>(id)].find('#') != std::string::npos;
}

std::pair<std::string, int> TokenVocabulary::dummy_info(TokenId id) const {
    if (!is_dummy(id)) throw TokenError("token " + std::to_string(id) + " is not a dummy variable");
    const std::string& n = names_[static_cast<std::size_t>(id)];
    auto hash = n.rfind('#');
    return {n.substr(0, hash), std::stoi(n.substr(hash + 1))};
}

std::vector<std::pair<SymbolId, SymbolId>> occurring_variables(const std::vector<std::vector<ParseTree>>& groups) {
    std::vector<std::pair<SymbolId, SymbolId>> out;
    std::set<SymbolId> seen;
    std::vector<const ParseTree*> stack;
    for (auto& g : groups)
        for (auto& t : g) {
            stack.push_back(&t);
            while (!stack.empty()) {
                const ParseTree* n = stack.back();
                stack.pop_back();
                if (n->is_variable()) {
                    if (seen.insert(n->var()).second) out.emplace_back(n->var(), n->typecode());
                    continue;
                }
                auto kids = n->children();
                for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(&*it);
            }
        }
    return out;
}

TokenSequence tokenize(const std::vector<std::vector<ParseTree>>& groups, const Renaming& renaming,
                       const TokenVocabulary& vocab, const Database& db) {
    std::unordered_map<TokenId, SymbolId> owner;
    for (auto& [var, type] : occurring_variables(groups)) {
        auto it = renaming.find(var);
        if (it == renaming.end()) throw TokenError("no dummy for variable '" + db.name(var) + "'");
        if (it->second < kSpecialCount) continue;
        auto [o, fresh] = owner.emplace(it->second, var);
        if (!fresh && o->second != var)
            throw TokenError("variables '" + db.name(o->second) + "' and '" + db.name(var) + "' share a dummy");
    }
    TokenSequence out;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (g > 0) {
            out.tokens.push_back(kEOS);
            out.features.push_back({0, 0, 0, 0});
        }
        for (std::size_t i = 0; i < groups[g].size(); ++i) {
            if (i > 0) {
                out.tokens.push_back(kEOH);
                out.features.push_back({0, 0, 0, 0});
            }
            emit(groups[g][i], 0, 0, 0, renaming, vocab, db, out);
        }
    }
    return out;
}

Renaming canonical_renaming(const std::vector<std::pair<SymbolId, SymbolId>>& vars, const TokenVocabulary& vocab,
                            const Database& db) {
    Renaming out;
    std::map<SymbolId, int> next;
    for (auto& [var, type] : vars) {
        int k = ++next[type];
        TokenId t = vocab.dummy(db.name(type), k);
        if (t < 0) throw TokenError("dummy supply for typecode '" + db.name(type) + "' exhausted");
        out[var] = t;
    }
    return out;
}

Renaming random_renaming(const std::vector<std::pair<SymbolId, SymbolId>>& vars, const TokenVocabulary& vocab,
                         const Database& db, std::mt19937_64& rng) {
    std::map<SymbolId, std::vector<SymbolId>> by_type;
    for (auto& [var, type] : vars) by_type[type].push_back(var);
    Renaming out;
    for (auto& [type, list] : by_type) {
        int supply = vocab.dummy_count(db.name(type));
        if (static_cast<int>(list.size()) > supply)
            throw TokenError("dummy supply for typecode '" + db.name(type) + "' exhausted");
        std::vector<int> ks(static_cast<std::size_t>(supply));
        for (int k = 0; k < supply; ++k) ks[static_cast<std::size_t>(k)] = k + 1;
        std::shuffle(ks.begin(), ks.end(), rng);
        for (std::size_t i = 0; i < list.size(); ++i) out[list[i]] = vocab.dummy(db.name(type), ks[i]);
    }
    return out;
}

namespace {

ParseTree decode(std::span<const TokenId> tokens, std::size_t& pos,
                 const std::unordered_map<TokenId, ParseTree>& inverse, const TokenVocabulary& vocab,
                 const Grammar& grammar) {
    if (pos >= tokens.size()) throw TokenError("token sequence ends inside a tree");
    TokenId t = tokens[pos++];
    if (t < kSpecialCount || static_cast<std::size_t>(t) >= vocab.size())
        throw TokenError("unexpected token id " + std::to_string(t));
    if (vocab.is_dummy(t)) {
        auto it = inverse.find(t);
        if (it == inverse.end()) throw TokenError("unbound dummy '" + vocab.name(t) + "'");
        return it->second;
    }
    auto label = grammar.database().find(vocab.name(t));
    const Production* p = label ? grammar.production(*label) : nullptr;
    if (!p) throw TokenError("'" + vocab.name(t) + "' is not a constructor");
    std::vector<ParseTree> kids;
    for (std::size_t i = 0; i < p->slot_types.size(); ++i) {
        kids.push_back(decode(tokens, pos, inverse, vocab, grammar));
        if (kids.back().typecode() != p->slot_types[i])
            throw TokenError("ill-typed argument to '" + vocab.name(t) + "'");
    }
    return ParseTree::apply(p->label, p->typecode, std::move(kids));
}

}  // namespace

ParseTree detokenize(std::span<const TokenId> tokens, const std::unordered_map<TokenId, ParseTree>& inverse,
                     const TokenVocabulary& vocab, const Grammar& grammar) {
    std::size_t pos = 0;
    ParseTree t = decode(tokens, pos, inverse, vocab, grammar);
    if (pos != tokens.size()) throw TokenError("trailing tokens after tree");
    return t;
}

}  // namespace mmp
