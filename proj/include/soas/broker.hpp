#ifndef SOAS_BROKER_HPP
#define SOAS_BROKER_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "soas/client.hpp"
#include "soas/config.hpp"
#include "soas/errors.hpp"
#include "soas/ranking.hpp"
#include "soas/registry.hpp"
#include "soas/registry_server.hpp"
#include "soas/render.hpp"
#include "soas/request.hpp"
#include "soas/store.hpp"

namespace soas {

// Deterministic request identities: a fixed token plus a per-process counter,
// e.g. "req-1". No clock or randomness involved, so seeded runs reproduce.
class RequestIdGenerator {
public:
    explicit RequestIdGenerator(std::string token = "req") : token_(std::move(token)) {}

    std::string next() { return token_ + "-" + std::to_string(counter_.fetch_add(1) + 1); }

private:
    std::string token_;
    std::atomic<std::uint64_t> counter_{0};
};

// Observability of one pipeline pass. stage_trace records stage entry in
// order; tests assert it is exactly PA,RPU,AL,AC,DB,LB,RG.
struct PipelineReport {
    std::string request_id;
    SemanticQuery query;
    std::size_t agents_located = 0;
    std::map<std::string, Outcome> agent_outcomes;
    std::vector<RankedResult> results;
    std::int64_t elapsed_ms = 0;
    std::vector<std::string> stage_trace;
};

struct HandleResult {
    RenderedOutput output;
    PipelineReport report;
};

// Raised when every located agent failed; carries the diagnostics so the
// caller can still show per-agent outcomes.
class NoAgentsRespondedError : public NoAgentsResponded {
public:
    NoAgentsRespondedError(const std::string& what, PipelineReport report)
        : NoAgentsResponded(what), report_(std::move(report)) {}
    const PipelineReport& report() const { return report_; }

private:
    PipelineReport report_;
};

// The user-facing orchestrator: drives request processing, agent location,
// fan-out, persistence, ranking and rendering in that fixed order.
class Broker {
public:
    Broker(const Config& cfg, AgentRegistry& registry, ResultStore& store)
        : cfg_(cfg),
          registry_(registry),
          store_(store),
          ids_(cfg.id_token),
          stopwords_(cfg.stopwords_path.empty() ? default_stopwords()
                                                : load_stopwords(cfg.stopwords_path)),
          lexicon_(cfg.lexicon_path.empty() ? DomainLexicon{} : load_lexicon(cfg.lexicon_path)),
          weights_{cfg.keyword_weight, cfg.pattern_weight} {}

    const std::set<std::string>& stopwords() const { return stopwords_; }
    const DomainLexicon& lexicon() const { return lexicon_; }

    HandleResult handle_request(const std::string& text, OutputFormat format) {
        auto started = std::chrono::steady_clock::now();
        PipelineReport report;
        report.stage_trace.push_back("PA");
        UserRequest request{ids_.next(), text, system_now_ms()};
        report.request_id = request.request_id;

        report.stage_trace.push_back("RPU");
        report.query = build_semantic_query(request, stopwords_, lexicon_);

        report.stage_trace.push_back("AL");
        registry_.prune_expired(system_now_ms());
        std::vector<AgentDescriptor> agents =
            registry_.locate(report.query.domain, {}, system_now_ms());
        report.agents_located = agents.size();
        if (agents.empty())
            throw NoAgentsAvailable("no live agents for domain '" + report.query.domain + "'");

        report.stage_trace.push_back("AC");
        FanOutOptions opts{cfg_.per_agent_timeout_ms, cfg_.overall_deadline_ms, cfg_.max_parallel,
                           cfg_.max_frame_bytes};
        std::vector<AgentResponse> responses = fan_out(report.query, agents, opts);

        report.stage_trace.push_back("DB");
        for (const auto& r : responses) store_.persist(request.request_id, r, system_now_ms());
        std::vector<AgentResponse> stored = store_.fetch(request.request_id);
        for (const auto& r : stored) report.agent_outcomes[r.agent_id] = r.outcome;

        bool any_ok = false;
        for (const auto& r : stored) any_ok = any_ok || r.outcome == Outcome::Ok;

        report.stage_trace.push_back("LB");
        report.results = rank(stored, report.query, weights_);

        report.stage_trace.push_back("RG");
        Diagnostics diag{request.request_id, report.agent_outcomes};
        RenderedOutput output = render(report.results, format, diag);

        report.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
        if (!any_ok)
            throw NoAgentsRespondedError("all " + std::to_string(stored.size()) +
                                             " located agents failed",
                                         std::move(report));
        return HandleResult{std::move(output), std::move(report)};
    }

private:
    const Config& cfg_;
    AgentRegistry& registry_;
    ResultStore& store_;
    RequestIdGenerator ids_;
    std::set<std::string> stopwords_;
    DomainLexicon lexicon_;
    RankWeights weights_;
};

}  // namespace soas

#endif
