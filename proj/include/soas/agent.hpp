#ifndef SOAS_AGENT_HPP
#define SOAS_AGENT_HPP

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "soas/config.hpp"
#include "soas/errors.hpp"
#include "soas/kb.hpp"
#include "soas/message.hpp"
#include "soas/net.hpp"
#include "soas/registry.hpp"

namespace soas {

// Shared watermark of concurrently handled queries; tests hang one across a
// whole agent fleet to verify the fan-out parallelism bound.
struct InflightGauge {
    std::atomic<int> current{0};
    std::atomic<int> peak{0};

    void enter() {
        int cur = current.fetch_add(1) + 1;
        int seen = peak.load();
        while (cur > seen && !peak.compare_exchange_weak(seen, cur)) {
        }
    }
    void leave() { current.fetch_sub(1); }
};

struct SimAgentOptions {
    std::string id;  // defaults to agent-<bound port>
    std::string domain;
    std::vector<std::string> capabilities = {"search"};
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 = ephemeral
    std::string registry_endpoint;  // empty = serve without registering
    ScriptedBehavior behavior;
    std::int64_t heartbeat_ms = 0;  // re-register period; 0 = register once
    std::int64_t register_timeout_ms = 2000;
    std::size_t max_frame_bytes = kDefaultMaxFrameBytes;
    std::shared_ptr<InflightGauge> gauge;  // optional instrumentation
};

// A domain agent for the harness: serves a triple knowledge base over the
// wire protocol and self-registers with the registry. The KB is immutable
// after load, so request handling is read-only.
class SimAgent {
public:
    SimAgent(KnowledgeBase kb, SimAgentOptions opts)
        : kb_(std::move(kb)),
          opts_(std::move(opts)),
          server_(opts_.host, opts_.port, [this](net::Socket& s) { handle_connection(s); }) {
        if (opts_.id.empty())
            opts_.id = "agent-" + std::to_string(server_.endpoint().port);
    }

    ~SimAgent() { stop(); }

    // Registers (when a registry endpoint is configured) and begins serving.
    void start() {
        if (!opts_.registry_endpoint.empty()) register_with_registry();
        server_.start();
        if (!opts_.registry_endpoint.empty() && opts_.heartbeat_ms > 0)
            heartbeat_thread_ = std::thread([this] { heartbeat_loop(); });
    }

    void stop() {
        {
            std::lock_guard lock(mu_);
            stopping_ = true;
        }
        cv_.notify_all();
        if (heartbeat_thread_.joinable()) heartbeat_thread_.join();
        server_.stop();
    }

    const net::HostPort& endpoint() const { return server_.endpoint(); }

    AgentDescriptor descriptor() const {
        AgentDescriptor d;
        d.agent_id = opts_.id;
        d.domain = opts_.domain;
        d.capabilities.insert(opts_.capabilities.begin(), opts_.capabilities.end());
        d.endpoint = endpoint().host + ":" + std::to_string(endpoint().port);
        d.last_seen = 0;  // the registry assigns this
        return d;
    }

    std::size_t queries_served() const { return queries_served_.load(); }

private:
    void register_with_registry() {
        auto ep = parse_host_port(opts_.registry_endpoint);
        if (!ep) throw RegistrationFailure("registry endpoint '" + opts_.registry_endpoint +
                                           "' is not host:port");
        std::string reason = "no attempt made";
        // A few short attempts so an agent racing the registry's startup wins.
        for (int attempt = 0; attempt < 5; ++attempt) {
            if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            try {
                if (send_register(*ep)) return;
                reason = "registry rejected the descriptor";
                break;  // a definite rejection will not improve on retry
            } catch (const std::exception& e) {
                reason = e.what();
            }
        }
        throw RegistrationFailure("agent '" + opts_.id + "': " + reason);
    }

    bool send_register(const net::HostPort& registry) {
        auto deadline = net::deadline_after(opts_.register_timeout_ms);
        net::Socket sock = net::connect_to(registry, deadline);
        std::string rid = "register-" + opts_.id;
        net::send_frame(sock, Message::register_agent(rid, descriptor()), deadline,
                        opts_.max_frame_bytes);
        net::SocketReader reader(sock, deadline);
        Message reply = decode_frame(reader, opts_.max_frame_bytes);
        return reply.kind == MessageKind::Ack && reply.request_id == rid;
    }

    void heartbeat_loop() {
        auto ep = parse_host_port(opts_.registry_endpoint);
        std::unique_lock lock(mu_);
        while (!stopping_) {
            if (cv_.wait_for(lock, std::chrono::milliseconds(opts_.heartbeat_ms),
                             [this] { return stopping_; }))
                return;
            lock.unlock();
            try {
                send_register(*ep);  // transient failures are retried next period
            } catch (const std::exception&) {
            }
            lock.lock();
        }
    }

    // Interruptible sleep so scripted delays don't stall shutdown.
    void scripted_sleep(std::int64_t ms) {
        std::unique_lock lock(mu_);
        cv_.wait_for(lock, std::chrono::milliseconds(ms), [this] { return stopping_; });
    }

    void handle_connection(net::Socket& sock) {
        net::BlockingSocketReader reader(sock);
        for (;;) {
            Message msg;
            try {
                auto m = try_decode_frame(reader, opts_.max_frame_bytes);
                if (!m) return;  // clean close
                msg = std::move(*m);
            } catch (const Error& e) {
                reply_best_effort(sock, Message::error("", "malformed", e.what()));
                return;
            }
            switch (msg.kind) {
                case MessageKind::Ping:
                    if (!reply_best_effort(sock, Message::pong(msg.request_id))) return;
                    break;
                case MessageKind::Query: {
                    if (opts_.gauge) opts_.gauge->enter();
                    queries_served_.fetch_add(1);
                    bool keep = handle_query(sock, msg);
                    if (opts_.gauge) opts_.gauge->leave();
                    if (!keep) return;
                    break;
                }
                default:
                    if (!reply_best_effort(sock,
                                           Message::error(msg.request_id, "unsupported",
                                                          std::string(kind_name(msg.kind)) +
                                                              " is not handled by agents")))
                        return;
            }
        }
    }

    bool handle_query(net::Socket& sock, const Message& msg) {
        switch (opts_.behavior.mode) {
            case ScriptedBehavior::Mode::Drop:
                return false;  // close without replying
            case ScriptedBehavior::Mode::Malformed: {
                // A well-framed payload that fails message parsing.
                static const std::string garbage = "{\"not\":\"a message\"}";
                std::vector<std::uint8_t> frame;
                std::uint32_t len = static_cast<std::uint32_t>(garbage.size());
                frame.push_back(static_cast<std::uint8_t>(len >> 24));
                frame.push_back(static_cast<std::uint8_t>(len >> 16));
                frame.push_back(static_cast<std::uint8_t>(len >> 8));
                frame.push_back(static_cast<std::uint8_t>(len));
                frame.insert(frame.end(), garbage.begin(), garbage.end());
                try {
                    net::send_all(sock, frame.data(), frame.size(), net::deadline_after(2000));
                } catch (const std::exception&) {
                    return false;
                }
                return true;
            }
            case ScriptedBehavior::Mode::Delay:
                scripted_sleep(opts_.behavior.delay_ms);
                {
                    std::lock_guard lock(mu_);
                    if (stopping_) return false;
                }
                [[fallthrough]];
            case ScriptedBehavior::Mode::Normal:
            default: {
                const auto& query = std::get<SemanticQuery>(msg.body);
                std::vector<ResultItem> items = answer(kb_, query, opts_.id);
                return reply_best_effort(sock, Message::results(msg.request_id, std::move(items)));
            }
        }
    }

    bool reply_best_effort(net::Socket& sock, const Message& m) {
        try {
            net::send_frame(sock, m, net::deadline_after(2000), opts_.max_frame_bytes);
            return true;
        } catch (const std::exception&) {
            return false;
        }
    }

    KnowledgeBase kb_;
    SimAgentOptions opts_;
    net::TcpServer server_;
    std::thread heartbeat_thread_;
    std::mutex mu_;
    std::condition_variable cv_;
    bool stopping_ = false;
    std::atomic<std::size_t> queries_served_{0};
};

}  // namespace soas

#endif
