#ifndef SOAS_RANKING_HPP
#define SOAS_RANKING_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "soas/message.hpp"
#include "soas/request.hpp"

namespace soas {

struct RankWeights {
    double keyword_weight = 0.5;
    double pattern_weight = 0.5;
};

struct RankedResult {
    ResultItem item;
    double score = 0.0;
    std::uint32_t rank = 0;  // 1-based, dense
    std::int64_t latency_ms = 0;  // of the response that carried the item

    bool operator==(const RankedResult&) const = default;
};

// |A ∩ B| / |A ∪ B|, with jaccard(∅, ∅) = 0 by convention.
inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& x : a)
        if (b.count(x)) ++inter;
    std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// score = kw_weight * jaccard(keywords, terms) + pat_weight * matched/|patterns|
inline double score(const ResultItem& item, const SemanticQuery& query,
                    const RankWeights& weights = {}) {
    std::set<std::string> keywords(query.keywords.begin(), query.keywords.end());
    double kw = jaccard(keywords, item.terms);
    double pat = query.patterns.empty()
                     ? 0.0
                     : static_cast<double>(item.matched_patterns) /
                           static_cast<double>(query.patterns.size());
    double s = weights.keyword_weight * kw + weights.pattern_weight * pat;
    return std::clamp(s, 0.0, 1.0);
}

struct ScoredItem {
    ResultItem item;
    double score = 0.0;
    std::int64_t latency_ms = 0;
};

// One entry per item_id: the highest-scoring occurrence wins, the earliest
// occurrence wins among equal scores.
inline std::vector<ScoredItem> dedupe(const std::vector<ScoredItem>& items) {
    std::map<std::string, std::size_t> best;  // item_id -> index into out
    std::vector<ScoredItem> out;
    for (const auto& it : items) {
        auto found = best.find(it.item.item_id);
        if (found == best.end()) {
            best.emplace(it.item.item_id, out.size());
            out.push_back(it);
        } else if (it.score > out[found->second].score) {
            out[found->second] = it;
        }
    }
    return out;
}

// Full prioritization: flatten Ok responses, score, dedupe, sort by
// (score desc, latency asc, item_id asc), assign dense ranks. The input is
// canonicalized by agent_id first, so any permutation of the same responses
// ranks identically.
inline std::vector<RankedResult> rank(const std::vector<AgentResponse>& responses,
                                      const SemanticQuery& query,
                                      const RankWeights& weights = {}) {
    std::vector<const AgentResponse*> ordered;
    ordered.reserve(responses.size());
    for (const auto& r : responses) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const AgentResponse* a, const AgentResponse* b) {
                         return a->agent_id < b->agent_id;
                     });

    std::vector<ScoredItem> scored;
    for (const AgentResponse* r : ordered) {
        if (r->outcome != Outcome::Ok) continue;
        for (const auto& item : r->items)
            scored.push_back(ScoredItem{item, score(item, query, weights), r->latency_ms});
    }
    std::vector<ScoredItem> unique = dedupe(scored);
    std::sort(unique.begin(), unique.end(), [](const ScoredItem& a, const ScoredItem& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
        return a.item.item_id < b.item.item_id;
    });

    std::vector<RankedResult> out;
    out.reserve(unique.size());
    for (std::size_t i = 0; i < unique.size(); ++i)
        out.push_back(RankedResult{unique[i].item, unique[i].score,
                                   static_cast<std::uint32_t>(i + 1), unique[i].latency_ms});
    return out;
}

}  // namespace soas

#endif
