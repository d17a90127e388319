#ifndef SOAS_CLIENT_HPP
#define SOAS_CLIENT_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "soas/message.hpp"
#include "soas/net.hpp"
#include "soas/registry.hpp"

namespace soas {

struct FanOutOptions {
    std::int64_t per_agent_timeout_ms = 2000;
    std::int64_t overall_deadline_ms = 5000;
    int max_parallel = 8;
    std::size_t max_frame_bytes = kDefaultMaxFrameBytes;
};

// One QUERY/RESULTS exchange with a single agent. Every failure mode becomes
// an outcome value; this never throws for per-agent trouble.
inline AgentResponse query_agent(const AgentDescriptor& descriptor, const SemanticQuery& query,
                                 std::int64_t timeout_ms,
                                 std::size_t max_frame_bytes = kDefaultMaxFrameBytes) {
    if (timeout_ms <= 0) throw std::invalid_argument("timeout_ms must be positive");
    AgentResponse resp;
    resp.agent_id = descriptor.agent_id;
    resp.request_id = query.request_id;
    auto started = net::Clock::now();
    auto deadline = started + std::chrono::milliseconds(timeout_ms);
    auto finish = [&](Outcome outcome) {
        resp.outcome = outcome;
        resp.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(net::Clock::now() -
                                                                                started)
                              .count();
        if (outcome != Outcome::Ok) resp.items.clear();
        return resp;
    };
    auto ep = parse_host_port(descriptor.endpoint);
    if (!ep) return finish(Outcome::ConnectFailed);
    try {
        net::Socket sock = net::connect_to(*ep, deadline);
        net::send_frame(sock, Message::query(query.request_id, query), deadline, max_frame_bytes);
        net::SocketReader reader(sock, deadline);
        Message reply = decode_frame(reader, max_frame_bytes);
        if (reply.kind != MessageKind::Results || reply.request_id != query.request_id)
            return finish(Outcome::ProtocolError);
        resp.items = std::get<std::vector<ResultItem>>(reply.body);
        return finish(Outcome::Ok);
    } catch (const net::NetTimeout&) {
        return finish(Outcome::Timeout);
    } catch (const net::NetConnectError&) {
        return finish(Outcome::ConnectFailed);
    } catch (const net::NetIoError&) {
        return finish(Outcome::ProtocolError);
    } catch (const Error&) {
        return finish(Outcome::ProtocolError);  // framing or payload violations
    }
}

// Queries all agents with at most max_parallel in flight. Always returns one
// response per descriptor, sorted by agent_id; agents that cannot start or
// finish before the overall deadline are reported as Timeout.
inline std::vector<AgentResponse> fan_out(const SemanticQuery& query,
                                          const std::vector<AgentDescriptor>& agents,
                                          const FanOutOptions& opts = {}) {
    if (agents.empty()) throw NoAgentsGiven("fan_out needs at least one agent");
    if (opts.max_parallel < 1) throw std::invalid_argument("max_parallel must be >= 1");
    if (opts.per_agent_timeout_ms <= 0)
        throw std::invalid_argument("per_agent_timeout_ms must be positive");
    if (opts.overall_deadline_ms < opts.per_agent_timeout_ms)
        throw std::invalid_argument("overall deadline must cover the per-agent timeout");

    std::vector<AgentDescriptor> ordered(agents);
    std::sort(ordered.begin(), ordered.end(),
              [](const AgentDescriptor& a, const AgentDescriptor& b) {
                  return a.agent_id < b.agent_id;
              });

    auto deadline = net::deadline_after(opts.overall_deadline_ms);
    std::vector<AgentResponse> responses(ordered.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= ordered.size()) return;
            std::int64_t remaining = net::remaining_ms(deadline);
            if (remaining <= 0) {
                AgentResponse r;
                r.agent_id = ordered[i].agent_id;
                r.request_id = query.request_id;
                r.outcome = Outcome::Timeout;
                responses[i] = std::move(r);
                continue;
            }
            responses[i] = query_agent(ordered[i], query,
                                       std::min(opts.per_agent_timeout_ms, remaining),
                                       opts.max_frame_bytes);
        }
    };

    std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(opts.max_parallel),
                                                  ordered.size());
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
    return responses;
}

}  // namespace soas

#endif
