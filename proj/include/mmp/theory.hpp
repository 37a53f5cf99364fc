#pragma once

#include <filesystem>
#include <memory>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mmp/database.hpp"
#include "mmp/frame.hpp"
#include "mmp/grammar.hpp"

namespace mmp {

/// A database together with its grammar and the frames of every provable
/// assertion. Owns the database; not copyable or movable so that the grammar
/// and frames can refer back into it.
class Theory {
public:
    explicit Theory(Database db);
    Theory(const Theory&) = delete;
    Theory& operator=(const Theory&) = delete;

    static std::unique_ptr<Theory> load(const std::filesystem::path& path);
    static std::unique_ptr<Theory> parse(std::string_view source);

    const Database& db() const { return *db_; }
    const Grammar& grammar() const { return grammar_; }

    /// Frames of all provable assertions in database order.
    const std::vector<TheoremFrame>& frames() const { return frames_; }
    const TheoremFrame* frame(StatementId label) const;

    /// Frames whose assertion could match an expression headed by `a`'s root
    /// constructor: same root, or a bare variable. Database order.
    std::vector<const TheoremFrame*> candidates(const ParseTree& a) const;

    Context context(StatementId label) const { return context_of(label, *db_, grammar_); }
    Context context(std::string_view label) const;

    /// Provable propositions (with proofs) in database order.
    std::vector<StatementId> propositions() const;

private:
    std::unique_ptr<Database> db_;
    Grammar grammar_;
    std::vector<TheoremFrame> frames_;
    std::unordered_map<StatementId, std::size_t> frame_index_;
    std::unordered_map<StatementId, std::vector<std::size_t>> by_head_;
    std::vector<std::size_t> variable_headed_;
};

}  // namespace mmp
