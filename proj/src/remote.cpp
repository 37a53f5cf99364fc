#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstring>
#include <future>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"

#include "mmp/guidance.hpp"
#include "mmp/theory.hpp"
#include "mmp/tokens.hpp"

namespace mmp {

using json = nlohmann::json;

struct RemoteGuidance::Impl {
    const Theory& theory;
    const TokenVocabulary& vocab;
    std::chrono::milliseconds timeout;
    std::string vocab_hash;
    int fd = -1;
    std::thread reader;
    std::mutex write_mu;
    std::mutex mu;
    std::map<std::int64_t, std::promise<json>> pending;
    std::set<std::int64_t> abandoned;  // timed out; a late reply is dropped
    std::int64_t next_id = 1;
    bool broken = false;
    std::string broken_reason;

    Impl(const Theory& t, const TokenVocabulary& v, std::chrono::milliseconds to) : theory(t), vocab(v), timeout(to), vocab_hash(v.hash()) {}

    void connect_to(const std::string& endpoint) {
        auto colon = endpoint.rfind(':');
        if (colon == std::string::npos) throw GuidanceError(GuidanceError::Kind::connection, "endpoint must be host:port");
        std::string host = endpoint.substr(0, colon), port = endpoint.substr(colon + 1);
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0)
            throw GuidanceError(GuidanceError::Kind::connection, "cannot resolve " + endpoint);
        for (addrinfo* p = res; p; p = p->ai_next) {
            fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
            ::close(fd);
            fd = -1;
        }
        freeaddrinfo(res);
        if (fd < 0) throw GuidanceError(GuidanceError::Kind::connection, "cannot connect to " + endpoint);
        reader = std::thread([this] { read_loop(); });
    }

    void fail_all(const std::string& reason) {
        std::lock_guard lock(mu);
        broken = true;
        broken_reason = reason;
        for (auto& [id, p] : pending)
            p.set_exception(std::make_exception_ptr(GuidanceError(GuidanceError::Kind::protocol, reason)));
        pending.clear();
    }

    void read_loop() {
        std::string buf;
        char chunk[4096];
        for (;;) {
            ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
            if (n <= 0) {
                fail_all("connection closed by the model service");
                return;
            }
            buf.append(chunk, static_cast<std::size_t>(n));
            std::size_t nl;
            while ((nl = buf.find('\n')) != std::string::npos) {
                std::string line = buf.substr(0, nl);
                buf.erase(0, nl + 1);
                if (line.empty()) continue;
                json msg = json::parse(line, nullptr, false);
                if (msg.is_discarded() || !msg.is_object() || !msg.contains("id") || !msg["id"].is_number_integer()) {
                    fail_all("protocol violation: malformed response");
                    continue;
                }
                std::lock_guard lock(mu);
                auto rid = msg["id"].get<std::int64_t>();
                if (abandoned.erase(rid)) continue;
                auto it = pending.find(rid);
                if (it == pending.end()) {
                    broken = true;
                    broken_reason = "protocol violation: response id " + msg["id"].dump() + " matches no request";
                    for (auto& [id, p] : pending)
                        p.set_exception(std::make_exception_ptr(GuidanceError(GuidanceError::Kind::protocol, broken_reason)));
                    pending.clear();
                    continue;
                }
                it->second.set_value(std::move(msg));
                pending.erase(it);
            }
        }
    }

    json call(const std::string& method, json payload) {
        std::int64_t id;
        std::future<json> fut;
        {
            std::lock_guard lock(mu);
            if (broken) throw GuidanceError(GuidanceError::Kind::connection, broken_reason);
            id = next_id++;
            fut = pending[id].get_future();
        }
        payload["vocab_hash"] = vocab_hash;
        std::string line = json{{"id", id}, {"method", method}, {"payload", std::move(payload)}}.dump() + "\n";
        {
            std::lock_guard lock(write_mu);
            const char* p = line.data();
            std::size_t left = line.size();
            while (left > 0) {
                ssize_t n = ::send(fd, p, left, MSG_NOSIGNAL);
                if (n <= 0) {
                    std::lock_guard l2(mu);
                    pending.erase(id);
                    throw GuidanceError(GuidanceError::Kind::connection, "write to model service failed");
                }
                p += n;
                left -= static_cast<std::size_t>(n);
            }
        }
        if (fut.wait_for(timeout) != std::future_status::ready) {
            std::lock_guard lock(mu);
            if (pending.erase(id)) abandoned.insert(id);
            throw GuidanceError(GuidanceError::Kind::timeout, method + " request timed out");
        }
        json msg = fut.get();
        if (msg.contains("error"))
            throw GuidanceError(GuidanceError::Kind::remote, "model service error: " + msg["error"].dump());
        if (!msg.contains("result")) throw GuidanceError(GuidanceError::Kind::protocol, "response without result");
        return msg["result"];
    }

    GenerateResult decode_candidates(const Context& ctx, const ViableTheorem& theorem, const json& r,
                                     const Renaming& ren, int beam_width, int token_limit) const;

    json encode(const TokenSequence& seq) const {
        return json{{"tokens", seq.tokens}, {"features", seq.features}};
    }

    // Context groups with canonical dummies. Returns the renaming used.
    Renaming context_renaming(const std::vector<std::vector<ParseTree>>& groups) const {
        std::vector<std::pair<SymbolId, SymbolId>> vars;
        for (auto& [v, t] : occurring_variables(groups))
            if (!is_placeholder(v)) vars.emplace_back(v, t);
        return canonical_renaming(vars, vocab, theory.db());
    }
};

RemoteGuidance::RemoteGuidance(const Theory& theory, const TokenVocabulary& vocab, const std::string& endpoint,
                               std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>(theory, vocab, timeout)) {
    impl_->connect_to(endpoint);
}

RemoteGuidance::~RemoteGuidance() {
    if (impl_->fd >= 0) ::shutdown(impl_->fd, SHUT_RDWR);
    if (impl_->reader.joinable()) impl_->reader.join();
    if (impl_->fd >= 0) ::close(impl_->fd);
}

double RemoteGuidance::payoff(const Context& ctx, const ParseTree& a) {
    std::vector<std::vector<ParseTree>> groups{ctx.hypotheses(), {a}};
    auto seq = tokenize(groups, impl_->context_renaming(groups), impl_->vocab, impl_->theory.db());
    json r = impl_->call("payoff", impl_->encode(seq));
    if (!r.contains("payoff") || !r["payoff"].is_number())
        throw GuidanceError(GuidanceError::Kind::protocol, "payoff response lacks a number");
    double p = r["payoff"].get<double>();
    if (!(p >= 0 && p <= 1)) throw GuidanceError(GuidanceError::Kind::protocol, "payoff outside [0, 1]");
    return p;
}

std::vector<double> RemoteGuidance::relevance(const Context& ctx, const ParseTree& a,
                                              std::span<const ViableTheorem> viable) {
    std::vector<std::vector<ParseTree>> groups{ctx.hypotheses(), {a}};
    auto seq = tokenize(groups, impl_->context_renaming(groups), impl_->vocab, impl_->theory.db());
    json payload = impl_->encode(seq);
    json labels = json::array();
    for (auto& v : viable) labels.push_back(impl_->theory.db().label(v.frame->label));
    payload["theorems"] = std::move(labels);
    json r = impl_->call("relevance", std::move(payload));
    if (!r.contains("probabilities") || !r["probabilities"].is_array() || r["probabilities"].size() != viable.size())
        throw GuidanceError(GuidanceError::Kind::protocol, "relevance response has the wrong length");
    std::vector<double> p;
    double total = 0;
    for (auto& x : r["probabilities"]) {
        if (!x.is_number() || x.get<double>() < 0) throw GuidanceError(GuidanceError::Kind::protocol, "bad probability");
        p.push_back(x.get<double>());
        total += p.back();
    }
    if (total <= 0) throw GuidanceError(GuidanceError::Kind::protocol, "relevance probabilities sum to zero");
    for (auto& x : p) x /= total;
    return p;
}

GenerateResult RemoteGuidance::generate(const Context& ctx, const ParseTree&, const ViableTheorem& theorem,
                                        int beam_width, int token_limit) {
    const TheoremFrame& f = *theorem.frame;
    GenerateResult out;
    if (f.unconstrained.empty()) {
        out.candidates.push_back({theorem.constrained, 1.0});
        return out;
    }
    const Database& db = impl_->theory.db();
    std::vector<std::vector<ParseTree>> groups{ctx.hypotheses(), partial_hypotheses(theorem)};
    Renaming ren = impl_->context_renaming(groups);
    for (std::size_t k = 0; k < f.unconstrained.size(); ++k) ren[placeholder_symbol(k)] = k == 0 ? kTARGET : kUV;
    auto seq = tokenize(groups, ren, impl_->vocab, db);
    json payload = impl_->encode(seq);
    payload["theorem"] = db.label(f.label);
    json uv = json::array();
    for (auto u : f.unconstrained) uv.push_back(db.name(f.find_var(u)->typecode));
    payload["unconstrained"] = std::move(uv);
    payload["beam_width"] = beam_width;
    payload["token_limit"] = token_limit;
    json r = impl_->call("generate", std::move(payload));
    if (!r.contains("candidates") || !r["candidates"].is_array())
        throw GuidanceError(GuidanceError::Kind::protocol, "generate response lacks candidates");
    try {
        return impl_->decode_candidates(ctx, theorem, r, ren, beam_width, token_limit);
    } catch (const nlohmann::json::exception& e) {
        throw GuidanceError(GuidanceError::Kind::protocol, std::string("malformed generate response: ") + e.what());
    }
}

GenerateResult RemoteGuidance::Impl::decode_candidates(const Context& ctx, const ViableTheorem& theorem, const json& r,
                                                       const Renaming& ren, int beam_width, int token_limit) const {
    const TheoremFrame& f = *theorem.frame;
    const Database& db = theory.db();
    GenerateResult out;
    out.hit_token_limit = r.value("hit_token_limit", false);

    // Dummies map back to context variables; unused dummies stand for fresh
    // variables and take the unused available variables of their typecode.
    std::unordered_map<TokenId, ParseTree> inverse;
    std::set<SymbolId> used;
    for (auto& [var, tok] : ren)
        if (!is_placeholder(var)) {
            const TypedVar* tv = ctx.find_var(var);
            if (!tv) continue;
            inverse.emplace(tok, ParseTree::variable(var, tv->typecode));
            used.insert(var);
        }
    std::map<std::string, std::vector<SymbolId>> spare;
    for (auto& tv : ctx.available_vars)
        if (!used.count(tv.var)) spare[db.name(tv.typecode)].push_back(tv.var);
    for (std::size_t id = kSpecialCount; id < vocab.size(); ++id) {
        auto tok = static_cast<TokenId>(id);
        if (!vocab.is_dummy(tok) || inverse.count(tok)) continue;
        auto [type, k] = vocab.dummy_info(tok);
        auto& list = spare[type];
        if (list.empty()) continue;
        auto tc = db.symbol(type);
        inverse.emplace(tok, ParseTree::variable(list.front(), *tc));
        list.erase(list.begin());
    }

    for (auto& c : r["candidates"]) {
        if (static_cast<int>(out.candidates.size()) >= beam_width) break;
        if (!c.contains("substitution") || !c["substitution"].is_array() ||
            c["substitution"].size() != f.unconstrained.size())
            throw GuidanceError(GuidanceError::Kind::protocol, "candidate has the wrong number of images");
        Substitution s = theorem.constrained;
        std::size_t tokens = 0;
        bool ok = true;
        for (std::size_t k = 0; k < f.unconstrained.size() && ok; ++k) {
            auto toks = c["substitution"][k].get<std::vector<TokenId>>();
            tokens += toks.size();
            try {
                ParseTree t = detokenize(toks, inverse, vocab, theory.grammar());
                if (t.typecode() != f.find_var(f.unconstrained[k])->typecode) ok = false;
                s[f.unconstrained[k]] = std::move(t);
            } catch (const TokenError&) {
                ok = false;
            }
        }
        // The engine revalidates everything a remote model proposes.
        if (!ok || static_cast<int>(tokens) > token_limit || !well_typed(s, f, ctx) || !check_disjoint(s, f, ctx))
            continue;
        out.candidates.push_back({std::move(s), c.value("probability", 0.0)});
    }
    return out;
}

}  // namespace mmp
