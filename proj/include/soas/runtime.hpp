#ifndef SOAS_RUNTIME_HPP
#define SOAS_RUNTIME_HPP

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "soas/agent.hpp"
#include "soas/broker.hpp"
#include "soas/config.hpp"
#include "soas/kb.hpp"
#include "soas/registry_server.hpp"

namespace soas {

// Everything one config describes, wired together: the registry (optionally
// wire-reachable), statically seeded descriptors, in-process harness agents
// that self-register over the wire, the store and the broker.
class Runtime {
public:
    explicit Runtime(Config cfg)
        : cfg_(std::move(cfg)),
          registry_(cfg_.registry_ttl_ms),
          store_(cfg_.journal_path, system_now_ms()),
          broker_(cfg_, registry_, store_) {}

    ~Runtime() { stop(); }

    void start() {
        for (const auto& seed : cfg_.registry_static)
            registry_.register_agent(seed, system_now_ms());

        // Harness agents need the listener; bind ephemerally when it is not
        // pinned in the config.
        if (!cfg_.registry_bind.empty() || !cfg_.harness_agents.empty()) {
            net::HostPort bind{"127.0.0.1", 0};
            if (!cfg_.registry_bind.empty()) bind = *parse_host_port(cfg_.registry_bind);
            registry_server_ = std::make_unique<RegistryServer>(registry_, bind.host, bind.port,
                                                                cfg_.max_frame_bytes);
            registry_server_->start();
        }

        for (const auto& spec : cfg_.harness_agents) {
            SimAgentOptions opts;
            opts.id = spec.id;
            opts.domain = spec.domain;
            opts.capabilities = spec.capabilities;
            opts.host = spec.host;
            opts.port = spec.port;
            opts.registry_endpoint = registry_server_->endpoint_string();
            opts.behavior = spec.behavior;
            opts.max_frame_bytes = cfg_.max_frame_bytes;
            agents_.push_back(
                std::make_unique<SimAgent>(load_knowledge_base(spec.kb_path), opts));
            agents_.back()->start();
        }

        if (cfg_.registry_settle_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.registry_settle_ms));
    }

    void stop() {
        for (auto& a : agents_) a->stop();
        agents_.clear();
        if (registry_server_) {
            registry_server_->stop();
            registry_server_.reset();
        }
    }

    const Config& config() const { return cfg_; }
    AgentRegistry& registry() { return registry_; }
    ResultStore& store() { return store_; }
    Broker& broker() { return broker_; }
    RegistryServer* registry_server() { return registry_server_.get(); }

private:
    Config cfg_;
    AgentRegistry registry_;
    ResultStore store_;
    Broker broker_;
    std::unique_ptr<RegistryServer> registry_server_;
    std::vector<std::unique_ptr<SimAgent>> agents_;
};

}  // namespace soas

#endif
