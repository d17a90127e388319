#ifndef SOAS_CONFIG_HPP
#define SOAS_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "soas/errors.hpp"
#include "soas/registry.hpp"
#include "soas/text.hpp"

namespace soas {

// How a simulated agent responds to QUERY frames. The non-normal modes exist
// for failure-path tests: a fixed delay, dropping the connection, or replying
// with a frame whose payload is not a valid message.
struct ScriptedBehavior {
    enum class Mode { Normal, Delay, Drop, Malformed };
    Mode mode = Mode::Normal;
    std::int64_t delay_ms = 0;
};

inline ScriptedBehavior parse_behavior(const std::string& s) {
    if (s.empty() || s == "normal") return {};
    if (s == "drop") return {ScriptedBehavior::Mode::Drop, 0};
    if (s == "malformed") return {ScriptedBehavior::Mode::Malformed, 0};
    if (s.rfind("delay:", 0) == 0) {
        std::int64_t ms = 0;
        for (char c : s.substr(6)) {
            if (c < '0' || c > '9') throw BadConfig("bad delay in behavior '" + s + "'");
            ms = ms * 10 + (c - '0');
        }
        return {ScriptedBehavior::Mode::Delay, ms};
    }
    throw BadConfig("unknown agent behavior '" + s + "'");
}

// An in-process agent launched by the runtime; see harness.agent in the
// config reference.
struct AgentSpec {
    std::string kb_path;
    std::string domain;
    std::string id;  // defaults to agent-<port> once the port is known
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 = ephemeral
    std::vector<std::string> capabilities = {"search"};
    ScriptedBehavior behavior;
};

struct Config {
    // registry.*
    std::int64_t registry_ttl_ms = 30000;
    std::string registry_bind;        // empty = no wire listener
    std::int64_t registry_settle_ms = 0;  // wait after startup for registrations
    std::vector<AgentDescriptor> registry_static;

    // comm.*
    std::int64_t per_agent_timeout_ms = 2000;
    std::int64_t overall_deadline_ms = 5000;
    int max_parallel = 8;
    std::size_t max_frame_bytes = 1024 * 1024;

    // store.*
    std::string journal_path;

    // rank.*
    double keyword_weight = 0.5;
    double pattern_weight = 0.5;

    // rpu.*
    std::string stopwords_path;
    std::string lexicon_path;

    // broker.*
    std::string id_token = "req";

    // harness.*
    std::vector<AgentSpec> harness_agents;
};

namespace detail {

inline std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw BadConfig("key '" + key + "': '" + value + "' is not an integer");
    }
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw BadConfig("key '" + key + "': '" + value + "' is not a number");
    }
}

// "id domain host:port cap1,cap2"
inline AgentDescriptor parse_static_agent(const std::string& value) {
    std::istringstream in(value);
    AgentDescriptor d;
    std::string caps;
    if (!(in >> d.agent_id >> d.domain >> d.endpoint >> caps))
        throw BadConfig("registry.static needs 'id domain host:port cap1,cap2', got '" + value +
                        "'");
    std::string extra;
    if (in >> extra) throw BadConfig("registry.static has trailing tokens: '" + value + "'");
    for (auto& c : split_on(caps, ','))
        if (!trim(c).empty()) d.capabilities.insert(trim(c));
    try {
        validate_descriptor(d);
    } catch (const InvalidDescriptor& e) {
        throw BadConfig(std::string("registry.static: ") + e.what());
    }
    return d;
}

// "kb=<path> domain=<d> [port=<p>] [host=<h>] [id=<id>] [capabilities=a,b] [behavior=...]"
inline AgentSpec parse_agent_spec(const std::string& value) {
    AgentSpec spec;
    spec.capabilities.clear();
    std::istringstream in(value);
    std::string tok;
    while (in >> tok) {
        size_t eq = tok.find('=');
        if (eq == std::string::npos)
            throw BadConfig("harness.agent tokens must be key=value, got '" + tok + "'");
        std::string k = tok.substr(0, eq);
        std::string v = tok.substr(eq + 1);
        if (k == "kb")
            spec.kb_path = v;
        else if (k == "domain")
            spec.domain = v;
        else if (k == "id")
            spec.id = v;
        else if (k == "host")
            spec.host = v;
        else if (k == "port") {
            std::int64_t p = parse_int("harness.agent port", v);
            if (p < 0 || p > 65535) throw BadConfig("harness.agent port out of range: " + v);
            spec.port = static_cast<std::uint16_t>(p);
        } else if (k == "capabilities") {
            for (auto& c : split_on(v, ','))
                if (!trim(c).empty()) spec.capabilities.push_back(trim(c));
        } else if (k == "behavior")
            spec.behavior = parse_behavior(v);
        else
            throw BadConfig("harness.agent: unknown key '" + k + "'");
    }
    if (spec.kb_path.empty() || spec.domain.empty())
        throw BadConfig("harness.agent needs at least kb=<path> and domain=<d>");
    if (spec.capabilities.empty()) spec.capabilities = {"search"};
    return spec;
}

}  // namespace detail

inline void validate_config(const Config& cfg) {
    if (std::fabs(cfg.keyword_weight + cfg.pattern_weight - 1.0) > 1e-9)
        throw BadConfig("rank.keyword_weight and rank.pattern_weight must sum to 1.0");
    if (cfg.keyword_weight < 0.0 || cfg.pattern_weight < 0.0)
        throw BadConfig("rank weights must be non-negative");
    if (cfg.registry_ttl_ms <= 0) throw BadConfig("registry.ttl_ms must be positive");
    if (cfg.max_parallel < 1) throw BadConfig("comm.max_parallel must be >= 1");
    if (cfg.per_agent_timeout_ms <= 0)
        throw BadConfig("comm.per_agent_timeout_ms must be positive");
    if (cfg.overall_deadline_ms < cfg.per_agent_timeout_ms)
        throw BadConfig("comm.overall_deadline_ms must be >= comm.per_agent_timeout_ms");
    if (cfg.max_frame_bytes < 64) throw BadConfig("comm.max_frame_bytes is unusably small");
    if (!cfg.registry_bind.empty() && !parse_host_port(cfg.registry_bind))
        throw BadConfig("registry.bind must be host:port");
}

// Flat key=value lines; "#" starts a comment; repeated registry.static and
// harness.agent keys accumulate.
inline Config parse_config(std::istream& in) {
    Config cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw BadConfig("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key == "registry.ttl_ms")
            cfg.registry_ttl_ms = detail::parse_int(key, value);
        else if (key == "registry.bind")
            cfg.registry_bind = value;
        else if (key == "registry.settle_ms")
            cfg.registry_settle_ms = detail::parse_int(key, value);
        else if (key == "registry.static")
            cfg.registry_static.push_back(detail::parse_static_agent(value));
        else if (key == "comm.per_agent_timeout_ms")
            cfg.per_agent_timeout_ms = detail::parse_int(key, value);
        else if (key == "comm.overall_deadline_ms")
            cfg.overall_deadline_ms = detail::parse_int(key, value);
        else if (key == "comm.max_parallel")
            cfg.max_parallel = static_cast<int>(detail::parse_int(key, value));
        else if (key == "comm.max_frame_bytes")
            cfg.max_frame_bytes = static_cast<std::size_t>(detail::parse_int(key, value));
        else if (key == "store.journal_path")
            cfg.journal_path = value;
        else if (key == "rank.keyword_weight")
            cfg.keyword_weight = detail::parse_double(key, value);
        else if (key == "rank.pattern_weight")
            cfg.pattern_weight = detail::parse_double(key, value);
        else if (key == "rpu.stopwords_path")
            cfg.stopwords_path = value;
        else if (key == "rpu.lexicon_path")
            cfg.lexicon_path = value;
        else if (key == "broker.id_token")
            cfg.id_token = value;
        else if (key == "harness.agent")
            cfg.harness_agents.push_back(detail::parse_agent_spec(value));
        else
            throw BadConfig("config line " + std::to_string(lineno) + ": unknown key '" + key +
                            "'");
    }
    validate_config(cfg);
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadConfig("cannot open config file '" + path + "'");
    return parse_config(in);
}

// Explicit path wins, then $SOAS_CONFIG, then built-in defaults.
inline Config resolve_config(const std::string& cli_path) {
    if (!cli_path.empty()) return load_config(cli_path);
    if (const char* env = std::getenv("SOAS_CONFIG"); env && *env) return load_config(env);
    return Config{};
}

}  // namespace soas

#endif
