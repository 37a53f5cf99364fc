#include "mmp/database.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mmp {

namespace {

constexpr std::int32_t kOpen = -1;
constexpr std::int32_t kClose = -2;

struct Token {
    std::string_view text;
    int line;
};

bool is_label_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
           c == '.';
}

bool valid_label(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), is_label_char);
}

bool valid_math_symbol(std::string_view s) {
    return !s.empty() && s.find('$') == std::string_view::npos &&
           std::all_of(s.begin(), s.end(), [](char c) { return c > ' ' && c < 127; });
}

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    int line = 1;
    std::size_t i = 0;
    bool in_comment = false;
    int comment_line = 0;
    while (i < src.size()) {
        char c = src[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
            ++i;
            continue;
        }
        if (static_cast<unsigned char>(c) < 32 || static_cast<unsigned char>(c) > 126)
            throw ParseError("invalid character in source", line);
        std::size_t j = i;
        while (j < src.size() && src[j] > ' ' && src[j] < 127) ++j;
        std::string_view tok = src.substr(i, j - i);
        i = j;
        if (in_comment) {
            if (tok == "$)") in_comment = false;
            else if (tok.find("$)") != std::string_view::npos || tok.find("$(") != std::string_view::npos)
                throw ParseError("malformed comment token '" + std::string(tok) + "'", line);
            continue;
        }
        if (tok == "$(") {
            in_comment = true;
            comment_line = line;
            continue;
        }
        out.push_back({tok, line});
    }
    if (in_comment) throw ParseError("unterminated comment", comment_line);
    return out;
}

}  // namespace

class DatabaseBuilder {
public:
    Database build(std::string_view source) {
        auto tokens = lex(source);
        scopes_.emplace_back();
        std::size_t i = 0;
        auto read_until = [&](std::size_t& k, std::string_view end, int start_line) {
            std::vector<std::string_view> body;
            while (k < tokens.size() && tokens[k].text != end) {
                if (tokens[k].text.size() >= 2 && tokens[k].text[0] == '$' && tokens[k].text != "$=" &&
                    tokens[k].text != "$.")
                    throw ParseError("unexpected keyword '" + std::string(tokens[k].text) + "'", tokens[k].line);
                if ((end == "$." && tokens[k].text == "$=") || (end == "$=" && tokens[k].text == "$."))
                    throw ParseError("unexpected '" + std::string(tokens[k].text) + "'", tokens[k].line);
                body.push_back(tokens[k].text);
                ++k;
            }
            if (k >= tokens.size())
                throw ParseError("statement not terminated by '" + std::string(end) + "'", start_line);
            ++k;
            return body;
        };

        while (i < tokens.size()) {
            const Token& t = tokens[i];
            if (t.text == "${") {
                scopes_.emplace_back();
                db_.layout_.push_back(kOpen);
                ++i;
            } else if (t.text == "$}") {
                if (scopes_.size() == 1) throw ParseError("'$}' without matching '${'", t.line);
                close_scope();
                db_.layout_.push_back(kClose);
                ++i;
            } else if (t.text == "$c") {
                ++i;
                auto body = read_until(i, "$.", t.line);
                if (scopes_.size() != 1) throw ParseError("$c must be in the outermost scope", t.line);
                if (body.empty()) throw ParseError("empty $c statement", t.line);
                Statement st;
                st.kind = StatementKind::constant;
                st.line = t.line;
                for (auto s : body) {
                    if (!valid_math_symbol(s)) throw ParseError("bad math symbol '" + std::string(s) + "'", t.line);
                    auto id = intern(s);
                    if (declared_.count(id)) throw ParseError("symbol '" + std::string(s) + "' redeclared", t.line);
                    declared_.insert(id);
                    db_.is_var_[static_cast<std::size_t>(id)] = false;
                    st.body.push_back(id);
                }
                push(std::move(st));
            } else if (t.text == "$v") {
                ++i;
                auto body = read_until(i, "$.", t.line);
                if (body.empty()) throw ParseError("empty $v statement", t.line);
                Statement st;
                st.kind = StatementKind::variable;
                st.line = t.line;
                for (auto s : body) {
                    if (!valid_math_symbol(s)) throw ParseError("bad math symbol '" + std::string(s) + "'", t.line);
                    auto id = intern(s);
                    if (declared_.count(id) && !db_.is_var_[static_cast<std::size_t>(id)])
                        throw ParseError("'" + std::string(s) + "' already declared as a constant", t.line);
                    if (active_var(id)) throw ParseError("variable '" + std::string(s) + "' redeclared", t.line);
                    declared_.insert(id);
                    db_.is_var_[static_cast<std::size_t>(id)] = true;
                    scopes_.back().vars.insert(id);
                    st.body.push_back(id);
                }
                push(std::move(st));
            } else if (t.text == "$d") {
                ++i;
                auto body = read_until(i, "$.", t.line);
                Statement st;
                st.kind = StatementKind::disjoint;
                st.line = t.line;
                for (auto s : body) {
                    auto id = lookup(s, t.line);
                    if (!active_var(id)) throw ParseError("$d on inactive variable '" + std::string(s) + "'", t.line);
                    if (std::find(st.body.begin(), st.body.end(), id) != st.body.end())
                        throw ParseError("repeated variable in $d", t.line);
                    st.body.push_back(id);
                }
                for (std::size_t a = 0; a < st.body.size(); ++a)
                    for (std::size_t b = a + 1; b < st.body.size(); ++b)
                        scopes_.back().dv.insert(VarPair::of(st.body[a], st.body[b]));
                push(std::move(st));
            } else if (t.text == "$[") {
                throw ParseError("file inclusion ($[ ... $]) is not supported", t.line);
            } else if (t.text.size() >= 1 && t.text[0] == '$') {
                throw ParseError("unexpected keyword '" + std::string(t.text) + "'", t.line);
            } else {
                parse_labeled(tokens, i, read_until);
            }
        }
        if (scopes_.size() != 1) throw ParseError("unclosed '${' at end of file", tokens.empty() ? 0 : tokens.back().line);
        detect_provable();
        return std::move(db_);
    }

private:
    struct Scope {
        std::set<SymbolId> vars;
        std::vector<StatementId> floats;
        std::vector<StatementId> essentials;
        std::set<VarPair> dv;
        std::map<SymbolId, StatementId> float_of;
    };

    template <class ReadUntil>
    void parse_labeled(const std::vector<Token>& tokens, std::size_t& i, ReadUntil& read_until) {
        const Token& lt = tokens[i];
        if (!valid_label(lt.text)) throw ParseError("bad label '" + std::string(lt.text) + "'", lt.line);
        if (i + 1 >= tokens.size()) throw ParseError("label without statement", lt.line);
        std::string label(lt.text);
        if (db_.labels_.count(label)) throw ParseError("duplicate label '" + label + "'", lt.line);
        std::string_view kw = tokens[i + 1].text;
        i += 2;
        Statement st;
        st.label = label;
        st.line = lt.line;
        if (kw == "$f") {
            auto body = read_until(i, "$.", lt.line);
            if (body.size() != 2) throw ParseError("$f must have a typecode and one variable", lt.line);
            st.kind = StatementKind::floating;
            st.typecode = constant_symbol(body[0], lt.line);
            auto v = lookup(body[1], lt.line);
            if (!active_var(v)) throw ParseError("$f on inactive variable '" + std::string(body[1]) + "'", lt.line);
            if (active_float(v) != kNoStatement)
                throw ParseError("variable '" + std::string(body[1]) + "' already has an active $f", lt.line);
            st.body = {v};
            auto id = push(std::move(st));
            scopes_.back().floats.push_back(id);
            scopes_.back().float_of[v] = id;
        } else if (kw == "$e") {
            auto body = read_until(i, "$.", lt.line);
            fill_math(st, body, lt.line);
            st.kind = StatementKind::essential;
            auto id = push(std::move(st));
            scopes_.back().essentials.push_back(id);
        } else if (kw == "$a") {
            auto body = read_until(i, "$.", lt.line);
            fill_math(st, body, lt.line);
            st.kind = StatementKind::axiom;
            make_frame(st, lt.line);
            push(std::move(st));
        } else if (kw == "$p") {
            auto body = read_until(i, "$=", lt.line);
            fill_math(st, body, lt.line);
            st.kind = StatementKind::proposition;
            auto proof = read_until(i, "$.", lt.line);
            if (proof.empty()) throw ParseError("empty proof for '" + label + "'", lt.line);
            for (auto p : proof) st.proof.emplace_back(p);
            make_frame(st, lt.line);
            push(std::move(st));
        } else {
            throw ParseError("expected $f, $e, $a or $p after label '" + label + "'", lt.line);
        }
    }

    void fill_math(Statement& st, const std::vector<std::string_view>& body, int line) {
        if (body.empty()) throw ParseError("statement '" + st.label + "' has no typecode", line);
        st.typecode = constant_symbol(body[0], line);
        for (std::size_t k = 1; k < body.size(); ++k) {
            auto id = lookup(body[k], line);
            if (db_.is_var_[static_cast<std::size_t>(id)] && !active_var(id))
                throw ParseError("inactive variable '" + std::string(body[k]) + "'", line);
            st.body.push_back(id);
        }
    }

    void make_frame(Statement& st, int line) {
        std::set<SymbolId> used;
        for (auto s : st.body)
            if (db_.is_var_[static_cast<std::size_t>(s)]) used.insert(s);
        std::vector<StatementId> essentials;
        for (auto& sc : scopes_)
            for (auto e : sc.essentials) {
                essentials.push_back(e);
                for (auto s : db_.statements_[static_cast<std::size_t>(e)].body)
                    if (db_.is_var_[static_cast<std::size_t>(s)]) used.insert(s);
            }
        std::vector<StatementId> mand = essentials;
        for (auto v : used) {
            auto f = active_float(v);
            if (f == kNoStatement)
                throw ParseError("variable '" + db_.symbols_[static_cast<std::size_t>(v)] + "' in '" + st.label +
                                     "' has no active $f",
                                 line);
            mand.push_back(f);
        }
        std::sort(mand.begin(), mand.end());
        st.mandatory = std::move(mand);
        std::set<VarPair> all;
        for (auto& sc : scopes_) {
            all.insert(sc.dv.begin(), sc.dv.end());
            st.active_floats.insert(st.active_floats.end(), sc.floats.begin(), sc.floats.end());
        }
        std::sort(st.active_floats.begin(), st.active_floats.end());
        st.active_dv.assign(all.begin(), all.end());
        for (auto& p : all)
            if (used.count(p.first) && used.count(p.second)) st.mandatory_dv.push_back(p);
    }

    void close_scope() {
        auto end = static_cast<StatementId>(db_.statements_.size());
        for (auto f : scopes_.back().floats) db_.hyp_scope_end_[f] = end;
        for (auto e : scopes_.back().essentials) db_.hyp_scope_end_[e] = end;
        scopes_.pop_back();
    }

    StatementId push(Statement st) {
        auto id = static_cast<StatementId>(db_.statements_.size());
        st.depth = static_cast<int>(scopes_.size()) - 1;
        if (!st.label.empty()) db_.labels_.emplace(st.label, id);
        db_.statements_.push_back(std::move(st));
        db_.layout_.push_back(id);
        return id;
    }

    SymbolId intern(std::string_view s) {
        auto it = db_.symbol_index_.find(std::string(s));
        if (it != db_.symbol_index_.end()) return it->second;
        auto id = static_cast<SymbolId>(db_.symbols_.size());
        db_.symbols_.emplace_back(s);
        db_.is_var_.push_back(false);
        db_.symbol_index_.emplace(std::string(s), id);
        return id;
    }

    SymbolId lookup(std::string_view s, int line) {
        auto it = db_.symbol_index_.find(std::string(s));
        if (it == db_.symbol_index_.end() || !declared_.count(it->second))
            throw ParseError("undeclared symbol '" + std::string(s) + "'", line);
        return it->second;
    }

    SymbolId constant_symbol(std::string_view s, int line) {
        auto id = lookup(s, line);
        if (db_.is_var_[static_cast<std::size_t>(id)])
            throw ParseError("typecode '" + std::string(s) + "' is not a constant", line);
        return id;
    }

    bool active_var(SymbolId v) const {
        for (auto& sc : scopes_)
            if (sc.vars.count(v)) return true;
        return false;
    }

    StatementId active_float(SymbolId v) const {
        for (auto& sc : scopes_) {
            auto it = sc.float_of.find(v);
            if (it != sc.float_of.end()) return it->second;
        }
        return kNoStatement;
    }

    void detect_provable() {
        std::map<SymbolId, int> votes;
        for (auto& st : db_.statements_)
            if (st.kind == StatementKind::proposition) ++votes[st.typecode];
        auto turnstile = db_.symbol_index_.find("|-");
        if (turnstile != db_.symbol_index_.end()) {
            for (auto& st : db_.statements_)
                if (st.is_assertion() && st.typecode == turnstile->second) {
                    db_.provable_ = turnstile->second;
                    return;
                }
        }
        if (votes.empty()) {
            if (turnstile != db_.symbol_index_.end()) db_.provable_ = turnstile->second;
            return;
        }
        db_.provable_ = std::max_element(votes.begin(), votes.end(), [](auto& a, auto& b) {
                            return a.second < b.second;
                        })->first;
    }

    Database db_;
    std::vector<Scope> scopes_;
    std::set<SymbolId> declared_;
};

Database Database::parse(std::string_view source) { return DatabaseBuilder{}.build(source); }

Database Database::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::optional<StatementId> Database::find(std::string_view label) const {
    auto it = labels_.find(std::string(label));
    if (it == labels_.end()) return std::nullopt;
    return it->second;
}

std::optional<SymbolId> Database::symbol(std::string_view name) const {
    auto it = symbol_index_.find(std::string(name));
    if (it == symbol_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<StatementId> Database::provable_assertions() const {
    std::vector<StatementId> out;
    for (std::size_t i = 0; i < statements_.size(); ++i)
        if (statements_[i].is_assertion() && statements_[i].typecode == provable_)
            out.push_back(static_cast<StatementId>(i));
    return out;
}

bool Database::hypothesis_active(StatementId hyp, StatementId at) const {
    if (hyp >= at) return false;
    auto it = hyp_scope_end_.find(hyp);
    return it == hyp_scope_end_.end() || at < it->second;
}

std::string Database::render(SymbolId typecode, std::span<const SymbolId> body) const {
    std::string out = name(typecode);
    for (auto s : body) {
        out += ' ';
        out += name(s);
    }
    return out;
}

std::string Database::serialize() const {
    std::ostringstream out;
    int depth = 0;
    auto indent = [&] { return std::string(static_cast<std::size_t>(2 * depth), ' '); };
    for (auto item : layout_) {
        if (item == kOpen) {
            out << indent() << "${\n";
            ++depth;
            continue;
        }
        if (item == kClose) {
            --depth;
            out << indent() << "$}\n";
            continue;
        }
        const Statement& st = statements_[static_cast<std::size_t>(item)];
        out << indent();
        auto names = [&](const std::vector<SymbolId>& v) {
            std::string s;
            for (auto x : v) s += name(x) + ' ';
            return s;
        };
        switch (st.kind) {
        case StatementKind::constant: out << "$c " << names(st.body) << "$.\n"; break;
        case StatementKind::variable: out << "$v " << names(st.body) << "$.\n"; break;
        case StatementKind::disjoint: out << "$d " << names(st.body) << "$.\n"; break;
        case StatementKind::floating:
            out << st.label << " $f " << name(st.typecode) << ' ' << name(st.body[0]) << " $.\n";
            break;
        case StatementKind::essential:
            out << st.label << " $e " << render(st.typecode, st.body) << " $.\n";
            break;
        case StatementKind::axiom: out << st.label << " $a " << render(st.typecode, st.body) << " $.\n"; break;
        case StatementKind::proposition:
            out << st.label << " $p " << render(st.typecode, st.body) << " $=";
            for (auto& p : st.proof) out << ' ' << p;
            out << " $.\n";
            break;
        }
    }
    return out.str();
}

std::vector<StatementId> decompress_proof(const Statement& prop, const Database& db) {
    if (prop.kind != StatementKind::proposition) throw ParseError("'" + prop.label + "' has no proof", prop.line);
    auto resolve = [&](const std::string& label) {
        auto id = db.find(label);
        if (!id) throw ParseError("proof of '" + prop.label + "' references unknown label '" + label + "'", prop.line);
        return *id;
    };
    std::vector<StatementId> out;
    if (!prop.compressed()) {
        out.reserve(prop.proof.size());
        for (auto& p : prop.proof) {
            if (p == "?") throw ParseError("proof of '" + prop.label + "' is incomplete", prop.line);
            out.push_back(resolve(p));
        }
        return out;
    }

    auto close = std::find(prop.proof.begin(), prop.proof.end(), ")");
    if (close == prop.proof.end()) throw ParseError("compressed proof of '" + prop.label + "' lacks ')'", prop.line);
    std::vector<StatementId> refs(prop.mandatory.begin(), prop.mandatory.end());
    for (auto it = prop.proof.begin() + 1; it != close; ++it) refs.push_back(resolve(*it));
    std::string code;
    for (auto it = close + 1; it != prop.proof.end(); ++it) code += *it;

    auto arity = [&](StatementId id) -> std::size_t {
        const Statement& st = db[id];
        return st.is_assertion() ? st.mandatory.size() : 0;
    };
    std::vector<std::vector<StatementId>> stack;
    std::vector<std::vector<StatementId>> saved;
    std::size_t num = 0;
    for (char c : code) {
        if (c >= 'U' && c <= 'Y') {
            num = num * 5 + static_cast<std::size_t>(c - 'U' + 1);
        } else if (c >= 'A' && c <= 'T') {
            num = num * 20 + static_cast<std::size_t>(c - 'A' + 1);
            if (num <= refs.size()) {
                StatementId id = refs[num - 1];
                std::size_t n = num <= prop.mandatory.size() ? 0 : arity(id);
                if (stack.size() < n)
                    throw ParseError("compressed proof of '" + prop.label + "' underflows", prop.line);
                std::vector<StatementId> step;
                for (std::size_t k = stack.size() - n; k < stack.size(); ++k)
                    step.insert(step.end(), stack[k].begin(), stack[k].end());
                stack.resize(stack.size() - n);
                step.push_back(id);
                stack.push_back(std::move(step));
            } else {
                std::size_t k = num - refs.size() - 1;
                if (k >= saved.size())
                    throw ParseError("compressed proof of '" + prop.label + "' references step " + std::to_string(num) +
                                         " out of range",
                                     prop.line);
                stack.push_back(saved[k]);
            }
            num = 0;
        } else if (c == 'Z') {
            if (stack.empty() || num != 0)
                throw ParseError("misplaced 'Z' in proof of '" + prop.label + "'", prop.line);
            saved.push_back(stack.back());
        } else if (c == '?') {
            throw ParseError("proof of '" + prop.label + "' is incomplete", prop.line);
        } else {
            throw ParseError(std::string("bad character '") + c + "' in compressed proof of '" + prop.label + "'",
                             prop.line);
        }
    }
    if (num != 0) throw ParseError("truncated compressed proof of '" + prop.label + "'", prop.line);
    for (auto& s : stack) out.insert(out.end(), s.begin(), s.end());
    return out;
}

}  // namespace mmp
