#ifndef SOAS_KB_HPP
#define SOAS_KB_HPP

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "soas/errors.hpp"
#include "soas/message.hpp"
#include "soas/request.hpp"
#include "soas/text.hpp"

namespace soas {

struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;

    bool operator==(const Triple&) const = default;
    bool operator<(const Triple& o) const {
        return std::tie(subject, predicate, object) < std::tie(o.subject, o.predicate, o.object);
    }
};

struct KnowledgeBase {
    std::vector<Triple> triples;  // lowercase, duplicate-free
};

// One triple per line, TAB-separated; "#" lines and blank lines are ignored;
// values are lowercased and duplicate triples collapse.
inline KnowledgeBase parse_knowledge_base(std::istream& in) {
    KnowledgeBase kb;
    std::set<Triple> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        auto fields = split_on(line, '\t');
        if (fields.size() != 3)
            throw MalformedLine("kb line " + std::to_string(lineno) + ": expected 3 TAB-separated fields, got " +
                                std::to_string(fields.size()));
        Triple t{to_lower(trim(fields[0])), to_lower(trim(fields[1])), to_lower(trim(fields[2]))};
        if (t.subject.empty() || t.predicate.empty() || t.object.empty())
            throw MalformedLine("kb line " + std::to_string(lineno) + ": empty field");
        if (seen.insert(t).second) kb.triples.push_back(std::move(t));
    }
    return kb;
}

inline KnowledgeBase load_knowledge_base(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open knowledge base '" + path + "'");
    return parse_knowledge_base(in);
}

namespace detail {

// A Literal slot must equal the triple's slot; a Variable binds, and the same
// variable must bind consistently within one pattern.
inline bool pattern_matches(const TriplePattern& p, const Triple& t) {
    std::map<std::string, const std::string*> bindings;
    auto slot_ok = [&](const Term& term, const std::string& value) {
        if (!term.is_variable()) return term.value == value;
        auto [it, inserted] = bindings.emplace(term.value, &value);
        return inserted || *it->second == value;
    };
    return slot_ok(p.subject, t.subject) && slot_ok(p.predicate, t.predicate) &&
           slot_ok(p.object, t.object);
}

}  // namespace detail

// Evaluates every pattern against the knowledge base. Matches are grouped by
// the matched triple's subject; each subject that satisfies at least one
// pattern becomes a ResultItem whose terms are all objects of that subject's
// triples, tokenized the same way requests are.
inline std::vector<ResultItem> answer(const KnowledgeBase& kb, const SemanticQuery& query,
                                      const std::string& agent_id = "") {
    std::map<std::string, std::set<std::size_t>> matched;  // subject -> pattern indices
    for (std::size_t pi = 0; pi < query.patterns.size(); ++pi)
        for (const auto& t : kb.triples)
            if (detail::pattern_matches(query.patterns[pi], t)) matched[t.subject].insert(pi);

    std::vector<ResultItem> out;
    for (const auto& [subject, patterns] : matched) {  // map order == item_id ascending
        ResultItem item;
        item.item_id = subject;
        item.title = subject;
        std::replace(item.title.begin(), item.title.end(), '_', ' ');
        for (const auto& t : kb.triples)
            if (t.subject == subject)
                for (auto& tok : tokenize(t.object)) item.terms.insert(std::move(tok));
        item.matched_patterns = static_cast<std::uint32_t>(patterns.size());
        item.source_agent = agent_id;
        out.push_back(std::move(item));
    }
    return out;
}

}  // namespace soas

#endif
