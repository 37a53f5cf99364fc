#include "support.hpp"

#include <sstream>

namespace testing {

mmp::ParseTree expr(const mmp::Theory& theory, std::string_view text, std::string_view scope_label) {
    const auto& db = theory.db();
    std::vector<mmp::SymbolId> syms;
    std::istringstream in{std::string(text)};
    for (std::string tok; in >> tok;) syms.push_back(db.symbol(tok).value());
    auto typing = mmp::scope_typing(db, db.find(scope_label).value());
    if (!syms.empty() && syms[0] == db.provable_typecode()) syms[0] = theory.grammar().logical_typecode();
    return theory.grammar().parse(syms, typing);
}

}  // namespace testing
