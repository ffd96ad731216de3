#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "attncause/model/recommender.hpp"

namespace attncause {

inline constexpr int kTraceSchemaVersion = 1;

struct TraceVariant {
    std::vector<ItemId> removed;  ///< sorted ascending
    Ranking topk;
};

/// One line of a trace file: a session recorded against an external model.
struct TraceSession {
    std::string session_id;
    std::vector<ItemId> items;
    Ranking topk;
    /// Attention of the extended input; `recommendation_appended` marks that
    /// its last token is topk[0].
    std::optional<Attention> attention;
    bool recommendation_appended = true;
    std::vector<TraceVariant> variants;

    /// Schema invariants: unique items, matching attention dimension,
    /// softmax rows unless flagged synthetic.
    void validate() const;
};

nlohmann::json to_json(const TraceSession& s);
TraceSession trace_session_from_json(const nlohmann::json& j);

/// Line-delimited JSON, one session per line.
std::vector<TraceSession> read_trace(const std::filesystem::path& path);
void write_trace(const std::filesystem::path& path, const std::vector<TraceSession>& sessions);

/// Ranking and attention wire forms shared by traces and the IPC protocol.
nlohmann::json ranking_to_json(const Ranking& r);
Ranking ranking_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

/// Newline-delimited JSON request/response over a child process's standard
/// streams. One request is in flight at a time.
class IpcClient final : public Recommender {
public:
    /// Spawns `command` through /bin/sh.
    explicit IpcClient(const std::string& command);
    ~IpcClient() override;
    IpcClient(const IpcClient&) = delete;
    IpcClient& operator=(const IpcClient&) = delete;

    /// Sends one request object and returns the parsed response line.
    nlohmann::json call(const nlohmann::json& request);

    /// {"op":"recommend","items":[...],"k":k} -> {"topk":[{"item":..,"score":..},...]}
    Ranking recommend(std::span<const ItemId> session, std::size_t k) override;
    /// {"op":"attention","items":[...]} -> {"attention":[[...],...]}
    Attention attention(std::span<const ItemId> tokens) override;

private:
    std::string read_line();

    int fd_ = -1;
    int pid_ = -1;
    std::string buffer_;
};

/// Answers queries from one recorded session: the session itself, its
/// stored counterfactual variants, and (when attached) a live endpoint for
/// anything else. Without an endpoint, missing variants are an error.
class TraceRecommender final : public Recommender {
public:
    explicit TraceRecommender(TraceSession session, std::shared_ptr<IpcClient> live = nullptr);

    Ranking recommend(std::span<const ItemId> session, std::size_t k) override;
    Attention attention(std::span<const ItemId> tokens) override;

    [[nodiscard]] const TraceSession& session() const { return trace_; }

private:
    TraceSession trace_;
    std::shared_ptr<IpcClient> live_;
};

}  // namespace attncause
