#ifndef SOAS_REQUEST_HPP
#define SOAS_REQUEST_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "soas/errors.hpp"
#include "soas/text.hpp"

namespace soas {

using ordered_json = nlohmann::ordered_json;

struct UserRequest {
    std::string request_id;
    std::string text;
    std::int64_t issued_at = 0;  // ms since epoch

    bool operator==(const UserRequest&) const = default;
};

// One slot of a triple pattern: either a lowercase literal or a ?variable.
struct Term {
    enum class Kind { Literal, Variable };
    Kind kind = Kind::Literal;
    std::string value;  // literal text, or variable name including the leading "?"

    static Term literal(std::string v) { return Term{Kind::Literal, std::move(v)}; }
    static Term variable(std::string v) { return Term{Kind::Variable, std::move(v)}; }

    bool is_variable() const { return kind == Kind::Variable; }
    bool operator==(const Term&) const = default;
    bool operator<(const Term& o) const {
        return std::tie(kind, value) < std::tie(o.kind, o.value);
    }
};

inline bool valid_variable_name(const std::string& v) {
    // ?[a-z][a-z0-9_]*
    if (v.size() < 2 || v[0] != '?') return false;
    if (v[1] < 'a' || v[1] > 'z') return false;
    for (size_t i = 2; i < v.size(); ++i) {
        char c = v[i];
        if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
    }
    return true;
}

inline bool valid_literal(const std::string& v) {
    if (v.empty()) return false;
    for (unsigned char c : v) {
        if (c >= 'A' && c <= 'Z') return false;
        if (c == '?') return false;  // would be ambiguous with variables
    }
    return true;
}

inline bool valid_term(const Term& t) {
    return t.kind == Term::Kind::Variable ? valid_variable_name(t.value) : valid_literal(t.value);
}

// Encoded form: variables keep their leading "?", literals are bare strings.
inline std::string term_to_string(const Term& t) { return t.value; }

inline Term term_from_string(const std::string& s) {
    Term t = s.size() > 0 && s[0] == '?' ? Term::variable(s) : Term::literal(s);
    if (!valid_term(t)) throw MalformedPayload("invalid term '" + s + "'");
    return t;
}

struct TriplePattern {
    Term subject;
    Term predicate;
    Term object;

    bool operator==(const TriplePattern&) const = default;
    bool operator<(const TriplePattern& o) const {
        return std::tie(subject, predicate, object) < std::tie(o.subject, o.predicate, o.object);
    }
    // A pattern with no variable is a fact check: legal, but it never binds.
    bool is_fact_check() const {
        return !subject.is_variable() && !predicate.is_variable() && !object.is_variable();
    }
};

struct SemanticQuery {
    std::string request_id;
    std::string domain;
    double confidence = 0.0;
    std::vector<std::string> keywords;
    std::vector<TriplePattern> patterns;
    std::vector<std::pair<std::string, std::string>> constraints;

    bool operator==(const SemanticQuery&) const = default;
};

// --- Canonical JSON (field order is part of the wire contract) -------------

inline ordered_json semantic_query_to_json(const SemanticQuery& q) {
    ordered_json j;
    j["request_id"] = q.request_id;
    j["domain"] = q.domain;
    j["confidence"] = q.confidence;
    j["keywords"] = q.keywords;
    ordered_json pats = ordered_json::array();
    for (const auto& p : q.patterns) {
        pats.push_back({term_to_string(p.subject), term_to_string(p.predicate),
                        term_to_string(p.object)});
    }
    j["patterns"] = std::move(pats);
    ordered_json cons = ordered_json::array();
    for (const auto& [k, v] : q.constraints) cons.push_back(k + "=" + v);
    j["constraints"] = std::move(cons);
    return j;
}

inline std::string serialize_semantic_query(const SemanticQuery& q) {
    return semantic_query_to_json(q).dump();
}

inline SemanticQuery semantic_query_from_json(const ordered_json& j) {
    if (!j.is_object()) throw MalformedPayload("semantic query must be an object");
    for (const char* field : {"request_id", "domain", "confidence", "keywords", "patterns",
                              "constraints"}) {
        if (!j.contains(field))
            throw MalformedPayload(std::string("semantic query missing field '") + field + "'");
    }
    if (j.size() != 6) throw MalformedPayload("semantic query has unexpected fields");
    SemanticQuery q;
    if (!j["request_id"].is_string() || !j["domain"].is_string())
        throw MalformedPayload("request_id and domain must be strings");
    q.request_id = j["request_id"].get<std::string>();
    q.domain = j["domain"].get<std::string>();
    if (!j["confidence"].is_number()) throw MalformedPayload("confidence must be a number");
    q.confidence = j["confidence"].get<double>();
    if (q.confidence < 0.0 || q.confidence > 1.0)
        throw MalformedPayload("confidence out of [0,1]");
    if (!j["keywords"].is_array()) throw MalformedPayload("keywords must be an array");
    for (const auto& k : j["keywords"]) {
        if (!k.is_string()) throw MalformedPayload("keyword must be a string");
        std::string kw = k.get<std::string>();
        if (!valid_literal(kw)) throw MalformedPayload("keyword '" + kw + "' not canonical");
        q.keywords.push_back(std::move(kw));
    }
    if (!j["patterns"].is_array()) throw MalformedPayload("patterns must be an array");
    for (const auto& p : j["patterns"]) {
        if (!p.is_array() || p.size() != 3)
            throw MalformedPayload("pattern must be a 3-element array");
        for (const auto& t : p)
            if (!t.is_string()) throw MalformedPayload("pattern slot must be a string");
        q.patterns.push_back(TriplePattern{term_from_string(p[0].get<std::string>()),
                                           term_from_string(p[1].get<std::string>()),
                                           term_from_string(p[2].get<std::string>())});
    }
    if (!j["constraints"].is_array()) throw MalformedPayload("constraints must be an array");
    for (const auto& c : j["constraints"]) {
        if (!c.is_string()) throw MalformedPayload("constraint must be a string");
        std::string s = c.get<std::string>();
        size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            throw MalformedPayload("constraint must look like key=value");
        q.constraints.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return q;
}

inline SemanticQuery parse_semantic_query(const std::string& s) {
    ordered_json j = ordered_json::parse(s, nullptr, false);
    if (j.is_discarded()) throw MalformedPayload("semantic query is not valid JSON");
    return semantic_query_from_json(j);
}

// --- Request analysis (the RPU) ---------------------------------------------

// Tokenization rule used everywhere tokens are needed: lowercase, split on
// every non-alphanumeric character, drop tokens shorter than 2.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    for (auto& t : split_tokens(text))
        if (t.size() >= 2) out.push_back(std::move(t));
    return out;
}

// Keyword extraction: tokenize, drop stopwords, dedupe keeping first occurrence.
inline std::vector<std::string> analyze(const std::string& text,
                                        const std::set<std::string>& stopwords) {
    if (trim(text).empty()) throw EmptyRequest("request text is empty");
    std::vector<std::string> keywords;
    std::set<std::string> seen;
    for (auto& tok : tokenize(text)) {
        if (stopwords.count(tok)) continue;
        if (seen.insert(tok).second) keywords.push_back(std::move(tok));
    }
    return keywords;
}

using DomainLexicon = std::map<std::string, std::set<std::string>>;

// Overlap scoring: score(d) = |keywords ∩ lexicon(d)| / max(1, |keywords|).
// Highest score wins, lexicographically smallest domain on ties; a zero best
// score classifies as ("general", 0.0).
inline std::pair<std::string, double> classify_domain(const std::vector<std::string>& keywords,
                                                      const DomainLexicon& lexicon) {
    std::string best_domain;
    double best_score = 0.0;
    for (const auto& [domain, terms] : lexicon) {  // map iterates in lexicographic order
        size_t overlap = 0;
        for (const auto& k : keywords)
            if (terms.count(k)) ++overlap;
        double score =
            static_cast<double>(overlap) / static_cast<double>(std::max<size_t>(1, keywords.size()));
        if (score > best_score) {
            best_score = score;
            best_domain = domain;
        }
    }
    if (best_score <= 0.0) return {"general", 0.0};
    return {best_domain, best_score};
}

// Pattern synthesis over the raw token stream, left to right:
//   "in X"   -> (?item, located-in, x)
//   "with X" -> (?item, has-feature, x)
//   remaining keyword k -> (?item, relates-to, k)
// A token value consumed by an in/with rule never also appears as relates-to.
inline std::vector<TriplePattern> synthesize_patterns(const std::vector<std::string>& raw_tokens,
                                                      const std::vector<std::string>& keywords) {
    const Term item = Term::variable("?item");
    std::set<std::string> consumed;
    for (size_t i = 0; i + 1 < raw_tokens.size(); ++i) {
        if (raw_tokens[i] == "in" || raw_tokens[i] == "with") {
            consumed.insert(raw_tokens[i]);
            consumed.insert(raw_tokens[i + 1]);
            ++i;  // the object token cannot start another rule
        }
    }
    std::set<std::string> keyword_set(keywords.begin(), keywords.end());
    std::vector<TriplePattern> patterns;
    std::set<std::string> emitted;
    for (size_t i = 0; i < raw_tokens.size(); ++i) {
        const std::string& tok = raw_tokens[i];
        if ((tok == "in" || tok == "with") && i + 1 < raw_tokens.size()) {
            const char* pred = tok == "in" ? "located-in" : "has-feature";
            if (emitted.insert(tok + "\t" + raw_tokens[i + 1]).second)
                patterns.push_back(
                    TriplePattern{item, Term::literal(pred), Term::literal(raw_tokens[i + 1])});
            ++i;
            continue;
        }
        if (keyword_set.count(tok) && !consumed.count(tok) &&
            emitted.insert("kw\t" + tok).second)
            patterns.push_back(TriplePattern{item, Term::literal("relates-to"), Term::literal(tok)});
    }
    return patterns;
}

inline SemanticQuery build_semantic_query(const UserRequest& request,
                                          const std::set<std::string>& stopwords,
                                          const DomainLexicon& lexicon) {
    std::vector<std::string> keywords = analyze(request.text, stopwords);
    auto [domain, confidence] = classify_domain(keywords, lexicon);
    SemanticQuery q;
    q.request_id = request.request_id;
    q.domain = domain;
    q.confidence = confidence;
    q.keywords = std::move(keywords);
    q.patterns = synthesize_patterns(split_tokens(request.text), q.keywords);
    return q;
}

// --- Config-file surfaces ----------------------------------------------------

// One lowercase token per line; "#" starts a comment; blank lines ignored.
inline std::set<std::string> parse_stopwords(std::istream& in) {
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string tok = trim(line);
        if (!tok.empty()) out.insert(to_lower(tok));
    }
    return out;
}

inline std::set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open stopword file '" + path + "'");
    return parse_stopwords(in);
}

// Lines of the form "domain: term1, term2, ...".
inline DomainLexicon parse_lexicon(std::istream& in) {
    DomainLexicon out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        size_t colon = line.find(':');
        if (colon == std::string::npos)
            throw MalformedLine("lexicon line " + std::to_string(lineno) + ": missing ':'");
        std::string domain = to_lower(trim(line.substr(0, colon)));
        if (domain.empty())
            throw MalformedLine("lexicon line " + std::to_string(lineno) + ": empty domain");
        auto& terms = out[domain];
        for (auto& part : split_on(line.substr(colon + 1), ',')) {
            std::string term = to_lower(trim(part));
            if (!term.empty()) terms.insert(term);
        }
    }
    return out;
}

inline DomainLexicon load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open lexicon file '" + path + "'");
    return parse_lexicon(in);
}

// Pinned default stopword list; override with rpu.stopwords_path.
inline const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words = {
        "about", "after",  "all",   "an",    "and",   "any",   "are",   "as",    "at",
        "be",    "been",   "before","but",   "by",    "can",   "could", "did",   "do",
        "does",  "find",   "for",   "from",  "get",   "give",  "had",   "has",   "have",
        "he",    "her",    "his",   "how",   "if",    "in",    "into",  "is",    "it",
        "its",   "list",   "me",    "my",    "near",  "no",    "not",   "of",    "on",
        "or",    "our",    "out",   "search","she",   "show",  "so",    "some",  "than",
        "that",  "the",    "their", "them",  "then",  "there", "these", "they",  "this",
        "to",    "up",     "us",    "was",   "we",    "were",  "what",  "when",  "where",
        "which", "who",    "will",  "with",  "would", "you",   "your",
    };
    return words;
}

}  // namespace soas

#endif
