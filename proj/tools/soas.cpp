#include <csignal>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "soas/soas.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void handle_signal(int) { g_stop = 1; }

void write_output(const soas::RenderedOutput& out, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << out.content;
        if (out.content.empty() || out.content.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw soas::IoFailure("cannot write '" + out_path + "'");
    f << out.content;
    if (out.content.empty() || out.content.back() != '\n') f << '\n';
}

int exit_code_for(const soas::Error& e) {
    switch (e.code()) {
        case soas::Errc::empty_request:       return 2;
        case soas::Errc::no_agents_available: return 3;
        case soas::Errc::no_agents_responded: return 4;
        default:                              return 1;
    }
}

int run_query(const std::string& text, const std::string& config_path, const std::string& format,
              const std::string& out_path) {
    auto fmt = soas::output_format_from_name(format);
    if (!fmt) throw soas::UnsupportedFormat("format '" + format + "' is not supported");
    soas::Runtime runtime(soas::resolve_config(config_path));
    runtime.start();
    auto result = runtime.broker().handle_request(text, *fmt);
    write_output(result.output, out_path);
    return 0;
}

int run_registry_list(const std::string& config_path) {
    soas::Runtime runtime(soas::resolve_config(config_path));
    runtime.start();
    auto now = soas::system_now_ms();
    auto agents = runtime.registry().locate("general", {}, now);
    std::cout << "agent_id | domain | endpoint | capabilities\n";
    for (const auto& d : agents) {
        std::string caps;
        for (const auto& c : d.capabilities) {
            if (!caps.empty()) caps += ",";
            caps += c;
        }
        std::cout << d.agent_id << " | " << d.domain << " | " << d.endpoint << " | " << caps
                  << "\n";
    }
    std::cout << "# " << agents.size() << " live agent(s)\n";
    return 0;
}

int run_agent(const std::string& kb_path, const std::string& domain, std::uint16_t port,
              const std::string& host, std::string id, const std::string& capabilities,
              const std::string& registry, const std::string& behavior,
              std::int64_t heartbeat_ms) {
    soas::SimAgentOptions opts;
    opts.domain = domain;
    opts.host = host;
    opts.port = port;
    opts.id = std::move(id);
    opts.registry_endpoint = registry;
    opts.behavior = soas::parse_behavior(behavior);
    opts.heartbeat_ms = heartbeat_ms;
    opts.capabilities.clear();
    for (auto& c : soas::split_on(capabilities, ','))
        if (!soas::trim(c).empty()) opts.capabilities.push_back(soas::trim(c));
    if (opts.capabilities.empty()) opts.capabilities = {"search"};

    soas::SimAgent agent(soas::load_knowledge_base(kb_path), opts);
    agent.start();
    std::cout << "agent " << agent.descriptor().agent_id << " (" << domain << ") listening on "
              << agent.endpoint().host << ":" << agent.endpoint().port << std::endl;

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    agent.stop();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"soas - semantic agent search broker"};
    app.require_subcommand(1);

    std::string text, config_path, format = "table", out_path;
    auto* query = app.add_subcommand("query", "run one request through the pipeline");
    query->add_option("text", text, "full-text request")->required();
    query->add_option("--format", format, "output format: json or table");
    query->add_option("--config", config_path, "config file path");
    query->add_option("--out", out_path, "write output to a file instead of stdout");

    auto* registry_cmd = app.add_subcommand("registry", "registry inspection");
    std::string reg_config;
    auto* list = registry_cmd->add_subcommand("list", "list live agents");
    list->add_option("--config", reg_config, "config file path");
    registry_cmd->require_subcommand(1);

    std::string kb_path, domain, agent_host = "127.0.0.1", agent_id, caps = "search";
    std::string registry_ep, behavior = "normal";
    std::uint16_t agent_port = 0;
    std::int64_t heartbeat_ms = 0;
    auto* agent_cmd = app.add_subcommand("agent", "simulated domain agents");
    auto* run = agent_cmd->add_subcommand("run", "serve a knowledge base");
    run->add_option("--kb", kb_path, "knowledge base file (TSV triples)")->required();
    run->add_option("--domain", domain, "agent domain tag")->required();
    run->add_option("--port", agent_port, "listen port (0 = ephemeral)")->required();
    run->add_option("--host", agent_host, "listen address");
    run->add_option("--id", agent_id, "agent id (default agent-<port>)");
    run->add_option("--capabilities", caps, "comma-separated capability tags");
    run->add_option("--registry", registry_ep, "registry endpoint to self-register with");
    run->add_option("--behavior", behavior, "normal | delay:<ms> | drop | malformed");
    run->add_option("--heartbeat-ms", heartbeat_ms, "re-register period (0 = register once)");
    agent_cmd->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (query->parsed()) return run_query(text, config_path, format, out_path);
        if (list->parsed()) return run_registry_list(reg_config);
        if (run->parsed())
            return run_agent(kb_path, domain, agent_port, agent_host, agent_id, caps, registry_ep,
                             behavior, heartbeat_ms);
    } catch (const soas::NoAgentsRespondedError& e) {
        std::cerr << e.what() << "\n";
        for (const auto& [id, outcome] : e.report().agent_outcomes)
            std::cerr << "  " << id << ": " << soas::outcome_name(outcome) << "\n";
        return 4;
    } catch (const soas::Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
