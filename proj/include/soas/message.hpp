#ifndef SOAS_MESSAGE_HPP
#define SOAS_MESSAGE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "soas/errors.hpp"
#include "soas/registry.hpp"
#include "soas/request.hpp"

namespace soas {

// One matched item as returned by a domain agent.
struct ResultItem {
    std::string item_id;  // canonical subject identifier
    std::string title;
    std::set<std::string> terms;       // lowercased vocabulary of the item
    std::uint32_t matched_patterns = 0;  // distinct query patterns this item satisfied
    std::string source_agent;

    bool operator==(const ResultItem&) const = default;
};

enum class Outcome { Ok, Timeout, ConnectFailed, ProtocolError };

inline const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Ok:            return "ok";
        case Outcome::Timeout:       return "timeout";
        case Outcome::ConnectFailed: return "connect_failed";
        case Outcome::ProtocolError: return "protocol_error";
    }
    return "protocol_error";
}

inline std::optional<Outcome> outcome_from_name(const std::string& s) {
    if (s == "ok") return Outcome::Ok;
    if (s == "timeout") return Outcome::Timeout;
    if (s == "connect_failed") return Outcome::ConnectFailed;
    if (s == "protocol_error") return Outcome::ProtocolError;
    return std::nullopt;
}

// One agent's answer to one query. Failures are data, not exceptions, so the
// scatter-gather layer can aggregate partial results.
struct AgentResponse {
    std::string agent_id;
    std::string request_id;
    std::vector<ResultItem> items;  // non-empty only when outcome == Ok
    std::int64_t latency_ms = 0;
    Outcome outcome = Outcome::Ok;

    bool operator==(const AgentResponse&) const = default;
};

enum class MessageKind { Query, Results, Error, Register, Ack, Ping, Pong };

inline const char* kind_name(MessageKind k) {
    switch (k) {
        case MessageKind::Query:    return "QUERY";
        case MessageKind::Results:  return "RESULTS";
        case MessageKind::Error:    return "ERROR";
        case MessageKind::Register: return "REGISTER";
        case MessageKind::Ack:      return "ACK";
        case MessageKind::Ping:     return "PING";
        case MessageKind::Pong:     return "PONG";
    }
    return "ERROR";
}

inline std::optional<MessageKind> kind_from_name(const std::string& s) {
    if (s == "QUERY") return MessageKind::Query;
    if (s == "RESULTS") return MessageKind::Results;
    if (s == "ERROR") return MessageKind::Error;
    if (s == "REGISTER") return MessageKind::Register;
    if (s == "ACK") return MessageKind::Ack;
    if (s == "PING") return MessageKind::Ping;
    if (s == "PONG") return MessageKind::Pong;
    return std::nullopt;
}

struct ErrorBody {
    std::string code;
    std::string text;

    bool operator==(const ErrorBody&) const = default;
};

// QUERY carries a SemanticQuery, RESULTS a list of ResultItem, ERROR a
// code+text pair, REGISTER an AgentDescriptor; ACK/PING/PONG have no body.
using MessageBody =
    std::variant<std::monostate, SemanticQuery, std::vector<ResultItem>, ErrorBody, AgentDescriptor>;

struct Message {
    MessageKind kind = MessageKind::Ping;
    std::string request_id;
    MessageBody body;

    bool operator==(const Message&) const = default;

    static Message query(std::string request_id, SemanticQuery q) {
        return {MessageKind::Query, std::move(request_id), std::move(q)};
    }
    static Message results(std::string request_id, std::vector<ResultItem> items) {
        return {MessageKind::Results, std::move(request_id), std::move(items)};
    }
    static Message error(std::string request_id, std::string code, std::string text) {
        return {MessageKind::Error, std::move(request_id), ErrorBody{std::move(code), std::move(text)}};
    }
    static Message register_agent(std::string request_id, AgentDescriptor d) {
        return {MessageKind::Register, std::move(request_id), std::move(d)};
    }
    static Message ack(std::string request_id) {
        return {MessageKind::Ack, std::move(request_id), std::monostate{}};
    }
    static Message ping(std::string request_id) {
        return {MessageKind::Ping, std::move(request_id), std::monostate{}};
    }
    static Message pong(std::string request_id) {
        return {MessageKind::Pong, std::move(request_id), std::monostate{}};
    }
};

// --- Canonical JSON ---------------------------------------------------------

inline ordered_json result_item_to_json(const ResultItem& it) {
    ordered_json j;
    j["item_id"] = it.item_id;
    j["title"] = it.title;
    j["terms"] = it.terms;  // std::set serializes sorted
    j["matched_patterns"] = it.matched_patterns;
    j["source_agent"] = it.source_agent;
    return j;
}

inline ResultItem result_item_from_json(const ordered_json& j) {
    if (!j.is_object() || j.size() != 5 || !j.contains("item_id") || !j.contains("title") ||
        !j.contains("terms") || !j.contains("matched_patterns") || !j.contains("source_agent"))
        throw MalformedPayload("result item has wrong shape");
    if (!j["item_id"].is_string() || !j["title"].is_string() || !j["source_agent"].is_string())
        throw MalformedPayload("result item string fields have wrong types");
    if (!j["terms"].is_array()) throw MalformedPayload("result item terms must be an array");
    if (!j["matched_patterns"].is_number_unsigned())
        throw MalformedPayload("matched_patterns must be a non-negative integer");
    ResultItem it;
    it.item_id = j["item_id"].get<std::string>();
    it.title = j["title"].get<std::string>();
    for (const auto& t : j["terms"]) {
        if (!t.is_string()) throw MalformedPayload("term must be a string");
        it.terms.insert(t.get<std::string>());
    }
    it.matched_patterns = j["matched_patterns"].get<std::uint32_t>();
    it.source_agent = j["source_agent"].get<std::string>();
    return it;
}

inline ordered_json descriptor_to_json(const AgentDescriptor& d) {
    ordered_json j;
    j["agent_id"] = d.agent_id;
    j["domain"] = d.domain;
    j["capabilities"] = d.capabilities;
    j["endpoint"] = d.endpoint;
    j["last_seen"] = d.last_seen;
    return j;
}

inline AgentDescriptor descriptor_from_json(const ordered_json& j) {
    if (!j.is_object() || j.size() != 5 || !j.contains("agent_id") || !j.contains("domain") ||
        !j.contains("capabilities") || !j.contains("endpoint") || !j.contains("last_seen"))
        throw MalformedPayload("agent descriptor has wrong shape");
    if (!j["agent_id"].is_string() || !j["domain"].is_string() || !j["endpoint"].is_string())
        throw MalformedPayload("agent descriptor string fields have wrong types");
    if (!j["capabilities"].is_array())
        throw MalformedPayload("capabilities must be an array");
    if (!j["last_seen"].is_number_integer())
        throw MalformedPayload("last_seen must be an integer");
    AgentDescriptor d;
    d.agent_id = j["agent_id"].get<std::string>();
    d.domain = j["domain"].get<std::string>();
    for (const auto& c : j["capabilities"]) {
        if (!c.is_string()) throw MalformedPayload("capability must be a string");
        d.capabilities.insert(c.get<std::string>());
    }
    d.endpoint = j["endpoint"].get<std::string>();
    d.last_seen = j["last_seen"].get<std::int64_t>();
    return d;
}

inline ordered_json agent_response_to_json(const AgentResponse& r) {
    ordered_json j;
    j["agent_id"] = r.agent_id;
    j["request_id"] = r.request_id;
    ordered_json items = ordered_json::array();
    for (const auto& it : r.items) items.push_back(result_item_to_json(it));
    j["items"] = std::move(items);
    j["latency_ms"] = r.latency_ms;
    j["outcome"] = outcome_name(r.outcome);
    return j;
}

inline AgentResponse agent_response_from_json(const ordered_json& j) {
    if (!j.is_object() || j.size() != 5 || !j.contains("agent_id") || !j.contains("request_id") ||
        !j.contains("items") || !j.contains("latency_ms") || !j.contains("outcome"))
        throw MalformedPayload("agent response has wrong shape");
    if (!j["agent_id"].is_string() || !j["request_id"].is_string() || !j["outcome"].is_string())
        throw MalformedPayload("agent response string fields have wrong types");
    if (!j["items"].is_array()) throw MalformedPayload("items must be an array");
    if (!j["latency_ms"].is_number_integer())
        throw MalformedPayload("latency_ms must be an integer");
    AgentResponse r;
    r.agent_id = j["agent_id"].get<std::string>();
    r.request_id = j["request_id"].get<std::string>();
    for (const auto& it : j["items"]) r.items.push_back(result_item_from_json(it));
    r.latency_ms = j["latency_ms"].get<std::int64_t>();
    if (r.latency_ms < 0) throw MalformedPayload("latency_ms must be non-negative");
    auto o = outcome_from_name(j["outcome"].get<std::string>());
    if (!o) throw MalformedPayload("unknown outcome '" + j["outcome"].get<std::string>() + "'");
    r.outcome = *o;
    if (r.outcome != Outcome::Ok && !r.items.empty())
        throw MalformedPayload("items must be empty on a failure outcome");
    return r;
}

// Payload fields are in the fixed order kind, request_id, body.
inline ordered_json message_to_json(const Message& m) {
    ordered_json j;
    j["kind"] = kind_name(m.kind);
    j["request_id"] = m.request_id;
    switch (m.kind) {
        case MessageKind::Query:
            j["body"] = semantic_query_to_json(std::get<SemanticQuery>(m.body));
            break;
        case MessageKind::Results: {
            ordered_json items = ordered_json::array();
            for (const auto& it : std::get<std::vector<ResultItem>>(m.body))
                items.push_back(result_item_to_json(it));
            j["body"] = std::move(items);
            break;
        }
        case MessageKind::Error: {
            const auto& e = std::get<ErrorBody>(m.body);
            ordered_json body;
            body["code"] = e.code;
            body["text"] = e.text;
            j["body"] = std::move(body);
            break;
        }
        case MessageKind::Register:
            j["body"] = descriptor_to_json(std::get<AgentDescriptor>(m.body));
            break;
        default:
            j["body"] = ordered_json::object();
    }
    return j;
}

inline Message message_from_json(const ordered_json& j) {
    if (!j.is_object() || j.size() != 3 || !j.contains("kind") || !j.contains("request_id") ||
        !j.contains("body"))
        throw MalformedPayload("message must have exactly kind, request_id, body");
    if (!j["kind"].is_string() || !j["request_id"].is_string())
        throw MalformedPayload("kind and request_id must be strings");
    auto kind = kind_from_name(j["kind"].get<std::string>());
    if (!kind) throw MalformedPayload("unknown message kind '" + j["kind"].get<std::string>() + "'");
    Message m;
    m.kind = *kind;
    m.request_id = j["request_id"].get<std::string>();
    const auto& body = j["body"];
    switch (m.kind) {
        case MessageKind::Query:
            m.body = semantic_query_from_json(body);
            break;
        case MessageKind::Results: {
            if (!body.is_array()) throw MalformedPayload("RESULTS body must be an array");
            std::vector<ResultItem> items;
            for (const auto& it : body) items.push_back(result_item_from_json(it));
            m.body = std::move(items);
            break;
        }
        case MessageKind::Error: {
            if (!body.is_object() || body.size() != 2 || !body.contains("code") ||
                !body.contains("text") || !body["code"].is_string() || !body["text"].is_string())
                throw MalformedPayload("ERROR body must be {code, text}");
            m.body = ErrorBody{body["code"].get<std::string>(), body["text"].get<std::string>()};
            break;
        }
        case MessageKind::Register:
            m.body = descriptor_from_json(body);
            break;
        default:
            if (!body.is_object() || !body.empty())
                throw MalformedPayload("body must be an empty object for this kind");
            m.body = std::monostate{};
    }
    return m;
}

// --- Frame codec -------------------------------------------------------------
//
// Wire format, bit-exact: [4-byte big-endian unsigned payload length]
// [UTF-8 JSON payload]. One frame per message; a connection may carry several
// sequential frames.

constexpr std::size_t kDefaultMaxFrameBytes = 1024 * 1024;  // 1 MiB

// Pull-based byte source so the codec works the same over sockets and buffers.
class ByteReader {
public:
    virtual ~ByteReader() = default;
    // Reads up to max bytes into dst; returns the count, 0 on end of stream.
    virtual std::size_t read(std::uint8_t* dst, std::size_t max) = 0;
};

class BufferReader final : public ByteReader {
public:
    explicit BufferReader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}
    explicit BufferReader(const std::string& data)
        : data_(data.begin(), data.end()) {}

    std::size_t read(std::uint8_t* dst, std::size_t max) override {
        std::size_t n = std::min(max, data_.size() - pos_);
        std::copy(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n), dst);
        pos_ += n;
        return n;
    }

    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::vector<std::uint8_t> data_;
    std::size_t pos_ = 0;
};

inline std::string encode_message_payload(const Message& m) { return message_to_json(m).dump(); }

inline std::vector<std::uint8_t> encode_frame(const Message& m,
                                              std::size_t max_frame_bytes = kDefaultMaxFrameBytes) {
    std::string payload = encode_message_payload(m);
    if (payload.size() > max_frame_bytes)
        throw FrameTooLarge("payload is " + std::to_string(payload.size()) + " bytes, cap is " +
                            std::to_string(max_frame_bytes));
    std::vector<std::uint8_t> out;
    out.reserve(4 + payload.size());
    std::uint32_t len = static_cast<std::uint32_t>(payload.size());
    out.push_back(static_cast<std::uint8_t>(len >> 24));
    out.push_back(static_cast<std::uint8_t>(len >> 16));
    out.push_back(static_cast<std::uint8_t>(len >> 8));
    out.push_back(static_cast<std::uint8_t>(len));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

namespace detail {

// Guard against adversarially nested JSON before handing the payload to the
// parser: limits the DOM's allocation to the same order as the payload size.
constexpr int kMaxJsonDepth = 64;

inline bool json_depth_ok(const std::string& payload, int max_depth = kMaxJsonDepth) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (char c : payload) {
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        switch (c) {
            case '"': in_string = true; break;
            case '{':
            case '[':
                if (++depth > max_depth) return false;
                break;
            case '}':
            case ']':
                --depth;
                break;
            default: break;
        }
    }
    return true;
}

inline bool read_exact(ByteReader& in, std::uint8_t* dst, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        std::size_t r = in.read(dst + got, n - got);
        if (r == 0) return false;
        got += r;
    }
    return true;
}

}  // namespace detail

inline Message parse_message_payload(const std::string& payload) {
    if (!detail::json_depth_ok(payload)) throw MalformedPayload("JSON nesting too deep");
    ordered_json j = ordered_json::parse(payload, nullptr, false);
    if (j.is_discarded()) throw MalformedPayload("payload is not valid JSON");
    return message_from_json(j);
}

// Reads exactly one frame; trailing bytes stay in the reader for the next one.
// The declared length is checked against the cap before any payload is read.
inline Message decode_frame(ByteReader& in, std::size_t max_frame_bytes = kDefaultMaxFrameBytes) {
    std::uint8_t header[4];
    if (!detail::read_exact(in, header, 4)) throw TruncatedFrame("stream ended inside the header");
    std::uint32_t len = (static_cast<std::uint32_t>(header[0]) << 24) |
                        (static_cast<std::uint32_t>(header[1]) << 16) |
                        (static_cast<std::uint32_t>(header[2]) << 8) |
                        static_cast<std::uint32_t>(header[3]);
    if (len > max_frame_bytes)
        throw FrameTooLarge("declared length " + std::to_string(len) + " exceeds cap " +
                            std::to_string(max_frame_bytes));
    std::string payload(len, '\0');
    if (len > 0 && !detail::read_exact(in, reinterpret_cast<std::uint8_t*>(payload.data()), len))
        throw TruncatedFrame("stream ended inside the payload");
    return parse_message_payload(payload);
}

// Like decode_frame, but a stream that ends cleanly between frames yields
// nullopt instead of TruncatedFrame. Connection read loops use this.
inline std::optional<Message> try_decode_frame(ByteReader& in,
                                               std::size_t max_frame_bytes = kDefaultMaxFrameBytes) {
    std::uint8_t header[4];
    std::size_t got = in.read(header, 1);
    if (got == 0) return std::nullopt;
    if (!detail::read_exact(in, header + 1, 3))
        throw TruncatedFrame("stream ended inside the header");
    std::uint32_t len = (static_cast<std::uint32_t>(header[0]) << 24) |
                        (static_cast<std::uint32_t>(header[1]) << 16) |
                        (static_cast<std::uint32_t>(header[2]) << 8) |
                        static_cast<std::uint32_t>(header[3]);
    if (len > max_frame_bytes)
        throw FrameTooLarge("declared length " + std::to_string(len) + " exceeds cap " +
                            std::to_string(max_frame_bytes));
    std::string payload(len, '\0');
    if (len > 0 && !detail::read_exact(in, reinterpret_cast<std::uint8_t*>(payload.data()), len))
        throw TruncatedFrame("stream ended inside the payload");
    return parse_message_payload(payload);
}

}  // namespace soas

#endif
