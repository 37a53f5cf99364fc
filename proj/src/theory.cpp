#include "mmp/theory.hpp"

#include <algorithm>

namespace mmp {

Theory::Theory(Database db) : db_(std::make_unique<Database>(std::move(db))), grammar_(*db_) {
    for (StatementId id : db_->provable_assertions()) {
        frame_index_[id] = frames_.size();
        frames_.push_back(frame_of(id, *db_, grammar_));
    }
    for (std::size_t i = 0; i < frames_.size(); ++i) {
        const ParseTree& a = frames_[i].assertion;
        if (a.is_variable()) variable_headed_.push_back(i);
        else by_head_[a.constructor()].push_back(i);
    }
}

std::unique_ptr<Theory> Theory::load(const std::filesystem::path& path) {
    return std::make_unique<Theory>(Database::load(path));
}

std::unique_ptr<Theory> Theory::parse(std::string_view source) {
    return std::make_unique<Theory>(Database::parse(source));
}

const TheoremFrame* Theory::frame(StatementId label) const {
    auto it = frame_index_.find(label);
    return it == frame_index_.end() ? nullptr : &frames_[it->second];
}

std::vector<const TheoremFrame*> Theory::candidates(const ParseTree& a) const {
    std::vector<std::size_t> idx = variable_headed_;
    if (!a.is_variable()) {
        auto it = by_head_.find(a.constructor());
        if (it != by_head_.end()) {
            std::vector<std::size_t> merged;
            std::merge(idx.begin(), idx.end(), it->second.begin(), it->second.end(), std::back_inserter(merged));
            idx = std::move(merged);
        }
    }
    std::vector<const TheoremFrame*> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(&frames_[i]);
    return out;
}

Context Theory::context(std::string_view label) const {
    auto id = db_->find(label);
    if (!id) throw FrameError("unknown label '" + std::string(label) + "'");
    return context(*id);
}

std::vector<StatementId> Theory::propositions() const {
    std::vector<StatementId> out;
    for (auto& f : frames_)
        if (!f.is_axiom) out.push_back(f.label);
    return out;
}

}  // namespace mmp
