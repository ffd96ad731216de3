#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "attncause/explain/explain.hpp"

namespace attncause {

enum class Method { Causal, Attention };

std::string method_name(Method m);

struct EvalRecord {
    std::string session_id;
    Method method = Method::Causal;
    bool found = false;
    int explanation_size = 0;
    /// 1-based position of the replacement in the original top-k, when there.
    std::optional<int> position;
    int forward_passes = 0;
    int probes = 0;
    std::string error;

    friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

struct EvalCase {
    std::string session_id;
    Session session;
    /// Fresh model per case, so cases can run on separate threads.
    std::function<std::unique_ptr<Recommender>()> make_model;
};

/// Runs both methods on every case with up to `workers` threads. Per-case
/// failures become records with `error` set. Output is sorted by session id,
/// causal before attention.
std::vector<EvalRecord> eval_run(const std::vector<EvalCase>& cases, const ExplainConfig& cfg, int workers = 1);

/// Records for one case (both methods).
std::vector<EvalRecord> eval_case(const EvalCase& c, const ExplainConfig& cfg);

struct MethodSummary {
    int sessions = 0;
    int found = 0;
    int errors = 0;
    /// Index p-2 for positions 2..k, then "outside" (found, not in top-k),
    /// then "none" (no explanation).
    std::vector<int> histogram;
    std::vector<int> sorted_sizes;
    double mean_size = 0.0;
    double mean_position = 0.0;
    double mean_forward_passes = 0.0;
};

struct Summary {
    int k = 5;
    MethodSummary causal;
    MethodSummary attention;
    /// (causal − attention) / attention per position 2..k; nullopt when the
    /// attention count is zero.
    std::vector<std::optional<double>> relative_gain;
    /// attention size − causal size per session where both found one.
    std::vector<std::pair<std::string, int>> size_difference;
    double forward_pass_ratio = 0.0;  ///< attention mean / causal mean
};

Summary summarize(const std::vector<EvalRecord>& records, int k);

std::string records_csv(const std::vector<EvalRecord>& records);
std::string positions_csv(const Summary& s);
std::string position_gain_csv(const Summary& s);
std::string set_sizes_csv(const Summary& s);
std::string size_difference_csv(const Summary& s);
std::string summary_csv(const Summary& s);

/// Writes every CSV plus SVG bar charts into `dir`.
void write_reports(const std::vector<EvalRecord>& records, const Summary& s, const std::filesystem::path& dir);

}  // namespace attncause
