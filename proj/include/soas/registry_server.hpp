#ifndef SOAS_REGISTRY_SERVER_HPP
#define SOAS_REGISTRY_SERVER_HPP

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>

#include "soas/message.hpp"
#include "soas/net.hpp"
#include "soas/registry.hpp"

namespace soas {

inline std::int64_t system_now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// Wire front-end of the agent directory: accepts REGISTER frames (answered
// with ACK) and PING (answered with PONG). Anything else gets an ERROR.
class RegistryServer {
public:
    using ClockFn = std::function<std::int64_t()>;

    RegistryServer(AgentRegistry& registry, const std::string& host, std::uint16_t port,
                   std::size_t max_frame_bytes = kDefaultMaxFrameBytes,
                   ClockFn clock = system_now_ms)
        : registry_(registry),
          max_frame_bytes_(max_frame_bytes),
          clock_(std::move(clock)),
          server_(host, port, [this](net::Socket& s) { handle_connection(s); }) {}

    ~RegistryServer() { stop(); }

    void start() { server_.start(); }
    void stop() { server_.stop(); }

    const net::HostPort& endpoint() const { return server_.endpoint(); }
    std::string endpoint_string() const {
        return endpoint().host + ":" + std::to_string(endpoint().port);
    }

private:
    void handle_connection(net::Socket& sock) {
        net::BlockingSocketReader reader(sock);
        for (;;) {
            Message msg;
            try {
                auto m = try_decode_frame(reader, max_frame_bytes_);
                if (!m) return;
                msg = std::move(*m);
            } catch (const Error& e) {
                reply(sock, Message::error("", "malformed", e.what()));
                return;
            }
            switch (msg.kind) {
                case MessageKind::Register:
                    try {
                        registry_.register_agent(std::get<AgentDescriptor>(msg.body), clock_());
                        if (!reply(sock, Message::ack(msg.request_id))) return;
                    } catch (const InvalidDescriptor& e) {
                        if (!reply(sock, Message::error(msg.request_id, "invalid_descriptor",
                                                        e.what())))
                            return;
                    }
                    break;
                case MessageKind::Ping:
                    if (!reply(sock, Message::pong(msg.request_id))) return;
                    break;
                default:
                    if (!reply(sock, Message::error(msg.request_id, "unsupported",
                                                    std::string(kind_name(msg.kind)) +
                                                        " is not handled by the registry")))
                        return;
            }
        }
    }

    bool reply(net::Socket& sock, const Message& m) {
        try {
            net::send_frame(sock, m, net::deadline_after(2000), max_frame_bytes_);
            return true;
        } catch (const std::exception&) {
            return false;
        }
    }

    AgentRegistry& registry_;
    std::size_t max_frame_bytes_;
    ClockFn clock_;
    net::TcpServer server_;
};

}  // namespace soas

#endif
