#ifndef SOAS_RENDER_HPP
#define SOAS_RENDER_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "soas/errors.hpp"
#include "soas/message.hpp"
#include "soas/ranking.hpp"

namespace soas {

enum class OutputFormat { Json, Table };

inline std::optional<OutputFormat> output_format_from_name(const std::string& s) {
    if (s == "json") return OutputFormat::Json;
    if (s == "table") return OutputFormat::Table;
    return std::nullopt;
}

struct RenderedOutput {
    OutputFormat format = OutputFormat::Table;
    std::string content;

    bool operator==(const RenderedOutput&) const = default;
};

// What the renderer reports alongside the results.
struct Diagnostics {
    std::string request_id;
    std::map<std::string, Outcome> agent_outcomes;  // keyed by agent_id
};

// Scores are displayed with exactly 3 decimals, rounded half-up.
inline std::string format_score(double s) {
    if (s < 0.0) s = 0.0;
    auto scaled = static_cast<std::int64_t>(std::floor(s * 1000.0 + 0.5));
    std::string frac = std::to_string(scaled % 1000);
    while (frac.size() < 3) frac.insert(frac.begin(), '0');
    return std::to_string(scaled / 1000) + "." + frac;
}

inline RenderedOutput render(const std::vector<RankedResult>& results, OutputFormat format,
                             const Diagnostics& diagnostics) {
    RenderedOutput out;
    out.format = format;
    switch (format) {
        case OutputFormat::Json: {
            ordered_json doc;
            doc["request_id"] = diagnostics.request_id;
            ordered_json arr = ordered_json::array();
            for (const auto& r : results) {
                ordered_json e;
                e["rank"] = r.rank;
                e["score"] = format_score(r.score);
                e["item_id"] = r.item.item_id;
                e["title"] = r.item.title;
                e["source_agent"] = r.item.source_agent;
                arr.push_back(std::move(e));
            }
            doc["results"] = std::move(arr);
            ordered_json agents = ordered_json::object();
            for (const auto& [id, outcome] : diagnostics.agent_outcomes)
                agents[id] = outcome_name(outcome);
            ordered_json diag;
            diag["agents_located"] = diagnostics.agent_outcomes.size();
            diag["agents"] = std::move(agents);
            doc["diagnostics"] = std::move(diag);
            out.content = doc.dump();
            break;
        }
        case OutputFormat::Table: {
            std::string t = "rank | score | item_id | title | source_agent\n";
            for (const auto& r : results) {
                t += std::to_string(r.rank) + " | " + format_score(r.score) + " | " +
                     r.item.item_id + " | " + r.item.title + " | " + r.item.source_agent + "\n";
            }
            t += "# request " + diagnostics.request_id + ": agents";
            for (const auto& [id, outcome] : diagnostics.agent_outcomes)
                t += " " + id + "=" + outcome_name(outcome);
            t += "\n";
            out.content = std::move(t);
            break;
        }
        default:
            throw UnsupportedFormat("unknown output format");
    }
    return out;
}

inline RenderedOutput render(const std::vector<RankedResult>& results, const std::string& format,
                             const Diagnostics& diagnostics) {
    auto fmt = output_format_from_name(format);
    if (!fmt) throw UnsupportedFormat("format '" + format + "' is not supported");
    return render(results, *fmt, diagnostics);
}

}  // namespace soas

#endif
