#include "attncause/model/trace.hpp"

#include <algorithm>
#include <fstream>

namespace attncause {

using nlohmann::json;

json ranking_to_json(const Ranking& r) {
    json out = json::array();
    for (const ScoredItem& s : r) out.push_back({{"item", s.item}, {"score", s.score}});
    return out;
}

Ranking ranking_from_json(const json& j) {
    Ranking out;
    for (const auto& e : j) out.push_back({e.at("item").get<ItemId>(), e.at("score").get<double>()});
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array()) throw FormatError("matrix must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j.at(r).size()) != cols) throw FormatError("ragged matrix row " + std::to_string(r));
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

void TraceSession::validate() const {
    try {
        Session{items}.validate();
    } catch (const Error& e) {
        throw FormatError("session " + session_id + ": " + e.what());
    }
    if (topk.empty()) throw FormatError("session " + session_id + " has an empty top-k list");
    if (!attention) return;
    const auto expected = static_cast<Eigen::Index>(items.size() + (recommendation_appended ? 1 : 0));
    if (attention->tokens() != expected || attention->values.cols() != expected) {
        throw FormatError("session " + session_id + ": attention is " + std::to_string(attention->values.rows()) + "x" +
                          std::to_string(attention->values.cols()) + ", expected " + std::to_string(expected) +
                          " tokens");
    }
    try {
        attncause::validate(*attention);
    } catch (const FormatError& e) {
        throw FormatError("session " + session_id + ": " + e.what());
    }
}

json to_json(const TraceSession& s) {
    json j;
    j["schema"] = kTraceSchemaVersion;
    j["session_id"] = s.session_id;
    j["items"] = s.items;
    j["topk"] = ranking_to_json(s.topk);
    j["recommendation_appended"] = s.recommendation_appended;
    if (s.attention) {
        j["attention"] = matrix_to_json(s.attention->values);
        j["synthetic_factor"] = s.attention->synthetic_factor;
    }
    json variants = json::array();
    for (const TraceVariant& v : s.variants) variants.push_back({{"removed", v.removed}, {"topk", ranking_to_json(v.topk)}});
    j["variants"] = std::move(variants);
    return j;
}

TraceSession trace_session_from_json(const json& j) {
    TraceSession s;
    try {
        const int schema = j.at("schema").get<int>();
        if (schema != kTraceSchemaVersion) throw FormatError("unsupported trace schema " + std::to_string(schema));
        s.session_id = j.at("session_id").get<std::string>();
        s.items = j.at("items").get<std::vector<ItemId>>();
        s.topk = ranking_from_json(j.at("topk"));
        s.recommendation_appended = j.value("recommendation_appended", true);
        if (j.contains("attention")) {
            Attention a;
            a.values = matrix_from_json(j.at("attention"));
            a.synthetic_factor = j.value("synthetic_factor", false);
            s.attention = std::move(a);
        }
        if (j.contains("variants")) {
            for (const auto& v : j.at("variants")) {
                TraceVariant tv{v.at("removed").get<std::vector<ItemId>>(), ranking_from_json(v.at("topk"))};
                std::sort(tv.removed.begin(), tv.removed.end());
                s.variants.push_back(std::move(tv));
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("trace schema violation: ") + e.what());
    }
    s.validate();
    return s;
}

std::vector<TraceSession> read_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trace file " + path.string());
    std::vector<TraceSession> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(trace_session_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_trace(const std::filesystem::path& path, const std::vector<TraceSession>& sessions) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write trace file " + path.string());
    for (const TraceSession& s : sessions) out << to_json(s).dump() << '\n';
}

TraceRecommender::TraceRecommender(TraceSession session, std::shared_ptr<IpcClient> live)
    : trace_(std::move(session)), live_(std::move(live)) {
    trace_.validate();
}

Ranking TraceRecommender::recommend(std::span<const ItemId> session, std::size_t k) {
    auto truncated = [k](Ranking r) {
        if (r.size() > k) r.resize(k);
        return r;
    };
    const std::vector<ItemId> query(session.begin(), session.end());
    if (query == trace_.items) return truncated(trace_.topk);

    // Variant lookup: the query must be the recorded session minus a subset,
    // in the recorded order.
    std::vector<ItemId> removed;
    for (ItemId v : trace_.items)
        if (std::find(query.begin(), query.end(), v) == query.end()) removed.push_back(v);
    if (without(trace_.items, removed) == query) {
        std::sort(removed.begin(), removed.end());
        for (const TraceVariant& v : trace_.variants)
            if (v.removed == removed) return truncated(v.topk);
    }
    if (live_) return live_->recommend(session, k);
    throw UnavailableError("trace session " + trace_.session_id + " has no recorded ranking for this query (" +
                           std::to_string(removed.size()) + " items removed) and no live endpoint is attached");
}

Attention TraceRecommender::attention(std::span<const ItemId> tokens) {
    std::vector<ItemId> recorded = trace_.items;
    if (trace_.recommendation_appended) recorded.push_back(trace_.topk.front().item);
    if (trace_.attention && std::equal(tokens.begin(), tokens.end(), recorded.begin(), recorded.end())) {
        return *trace_.attention;
    }
    if (live_) return live_->attention(tokens);
    throw UnavailableError("trace session " + trace_.session_id + " has no attention for the requested tokens");
}

}  // namespace attncause
