#ifndef SOAS_STORE_HPP
#define SOAS_STORE_HPP

#include <fcntl.h>
#include <unistd.h>

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "soas/errors.hpp"
#include "soas/message.hpp"

namespace soas {

struct StoredBatch {
    std::string request_id;
    std::vector<AgentResponse> responses;  // append order, never mutated
    std::int64_t created_at = 0;
};

// Per-request response batches, in memory, with an optional JSON-lines
// journal (one {"request_id", "response"} object per line). The journal is
// replayed at construction and fsynced before persist() acknowledges.
class ResultStore {
public:
    explicit ResultStore(std::string journal_path = "", std::int64_t created_now = 0)
        : journal_path_(std::move(journal_path)) {
        if (journal_path_.empty()) return;
        replay(created_now);
        fd_ = ::open(journal_path_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
        if (fd_ < 0) throw StorageFailure("cannot open journal '" + journal_path_ + "'");
    }

    ~ResultStore() {
        if (fd_ >= 0) ::close(fd_);
    }

    ResultStore(const ResultStore&) = delete;
    ResultStore& operator=(const ResultStore&) = delete;

    void persist(const std::string& request_id, const AgentResponse& response,
                 std::int64_t now = 0) {
        if (response.request_id != request_id)
            throw RequestIdMismatch("response carries request_id '" + response.request_id +
                                    "', expected '" + request_id + "'");
        std::lock_guard lock(mu_);
        if (fd_ >= 0) {
            ordered_json line;
            line["request_id"] = request_id;
            line["response"] = agent_response_to_json(response);
            std::string out = line.dump();
            out.push_back('\n');
            if (!write_all(out)) throw StorageFailure("journal write failed");
            if (::fsync(fd_) != 0) throw StorageFailure("journal fsync failed");
        }
        auto [it, inserted] = batches_.try_emplace(request_id);
        if (inserted) {
            it->second.request_id = request_id;
            it->second.created_at = now;
        }
        it->second.responses.push_back(response);
    }

    // Unknown request ids yield an empty list.
    std::vector<AgentResponse> fetch(const std::string& request_id) const {
        std::lock_guard lock(mu_);
        auto it = batches_.find(request_id);
        if (it == batches_.end()) return {};
        return it->second.responses;
    }

    std::vector<std::string> request_ids() const {
        std::lock_guard lock(mu_);
        std::vector<std::string> out;
        out.reserve(batches_.size());
        for (const auto& [id, batch] : batches_) out.push_back(id);
        return out;
    }

    std::size_t batch_count() const {
        std::lock_guard lock(mu_);
        return batches_.size();
    }

private:
    bool write_all(const std::string& data) {
        std::size_t written = 0;
        while (written < data.size()) {
            ssize_t w = ::write(fd_, data.data() + written, data.size() - written);
            if (w < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            written += static_cast<std::size_t>(w);
        }
        return true;
    }

    void replay(std::int64_t created_now) {
        std::ifstream in(journal_path_);
        if (!in) return;  // nothing to replay yet
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            ordered_json j = ordered_json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("request_id") ||
                !j.contains("response") || !j["request_id"].is_string())
                throw StorageFailure("journal line " + std::to_string(lineno) + " is malformed");
            std::string request_id = j["request_id"].get<std::string>();
            AgentResponse resp;
            try {
                resp = agent_response_from_json(j["response"]);
            } catch (const Error& e) {
                throw StorageFailure("journal line " + std::to_string(lineno) + ": " + e.what());
            }
            if (resp.request_id != request_id)
                throw StorageFailure("journal line " + std::to_string(lineno) +
                                     ": request_id mismatch");
            auto [it, inserted] = batches_.try_emplace(request_id);
            if (inserted) {
                it->second.request_id = request_id;
                it->second.created_at = created_now;
            }
            it->second.responses.push_back(std::move(resp));
        }
    }

    std::string journal_path_;
    int fd_ = -1;
    mutable std::mutex mu_;
    std::map<std::string, StoredBatch> batches_;
};

}  // namespace soas

#endif
