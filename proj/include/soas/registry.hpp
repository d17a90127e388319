#ifndef SOAS_REGISTRY_HPP
#define SOAS_REGISTRY_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "soas/errors.hpp"
#include "soas/text.hpp"

namespace soas {

struct AgentDescriptor {
    std::string agent_id;
    std::string domain;
    std::set<std::string> capabilities;
    std::string endpoint;  // host:port
    std::int64_t last_seen = 0;

    bool operator==(const AgentDescriptor&) const = default;
};

inline void validate_descriptor(const AgentDescriptor& d) {
    if (d.agent_id.empty()) throw InvalidDescriptor("agent_id is empty");
    if (d.domain.empty()) throw InvalidDescriptor("domain is empty");
    if (d.capabilities.empty())
        throw InvalidDescriptor("agent '" + d.agent_id + "' advertises no capabilities");
    if (!parse_host_port(d.endpoint))
        throw InvalidDescriptor("endpoint '" + d.endpoint + "' is not host:port");
}

// Central agent directory with TTL liveness. An agent counts as available
// while now - last_seen <= ttl; re-registration refreshes the window.
// All operations take the registry lock, so readers never observe a
// partially applied update.
class AgentRegistry {
public:
    static constexpr std::int64_t kDefaultTtlMs = 30000;

    explicit AgentRegistry(std::int64_t ttl_ms = kDefaultTtlMs) : ttl_ms_(ttl_ms) {}

    std::int64_t ttl_ms() const { return ttl_ms_; }

    // Idempotent upsert: an existing agent_id is replaced wholesale.
    void register_agent(AgentDescriptor descriptor, std::int64_t now) {
        validate_descriptor(descriptor);
        descriptor.last_seen = now;
        std::lock_guard lock(mu_);
        agents_[descriptor.agent_id] = std::move(descriptor);
    }

    // Removing an absent id is a no-op.
    void deregister(const std::string& agent_id) {
        std::lock_guard lock(mu_);
        agents_.erase(agent_id);
    }

    // Live descriptors of the given domain whose capabilities cover
    // required_capabilities, sorted by agent_id. Domain "general" matches
    // every live agent.
    std::vector<AgentDescriptor> locate(const std::string& domain,
                                        const std::set<std::string>& required_capabilities,
                                        std::int64_t now) const {
        std::lock_guard lock(mu_);
        std::vector<AgentDescriptor> out;
        for (const auto& [id, d] : agents_) {
            if (now - d.last_seen > ttl_ms_) continue;
            if (domain != "general" && d.domain != domain) continue;
            if (!std::includes(d.capabilities.begin(), d.capabilities.end(),
                               required_capabilities.begin(), required_capabilities.end()))
                continue;
            out.push_back(d);
        }
        return out;  // map order == agent_id ascending
    }

    std::size_t prune_expired(std::int64_t now) {
        std::lock_guard lock(mu_);
        std::size_t removed = 0;
        for (auto it = agents_.begin(); it != agents_.end();) {
            if (now - it->second.last_seen > ttl_ms_) {
                it = agents_.erase(it);
                ++removed;
            } else {
                ++it;
            }
        }
        return removed;
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return agents_.size();
    }

    std::vector<AgentDescriptor> snapshot() const {
        std::lock_guard lock(mu_);
        std::vector<AgentDescriptor> out;
        out.reserve(agents_.size());
        for (const auto& [id, d] : agents_) out.push_back(d);
        return out;
    }

private:
    std::int64_t ttl_ms_;
    mutable std::mutex mu_;
    std::map<std::string, AgentDescriptor> agents_;
};

}  // namespace soas

#endif
