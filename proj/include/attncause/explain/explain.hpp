#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "attncause/discovery/fci.hpp"
#include "attncause/explain/pi.hpp"
#include "attncause/model/recommender.hpp"

namespace attncause {

/// One counterfactual query: the session minus `removed`, and its new top-1.
struct Probe {
    std::vector<ItemId> removed;
    std::optional<ItemId> top1;
    bool accepted = false;

    friend bool operator==(const Probe&, const Probe&) = default;
};

struct ExplanationResult {
    ItemId recommendation = 0;
    /// Items whose removal flips the recommendation, in session order.
    std::vector<ItemId> explanation;
    std::optional<ItemId> alternative;
    std::optional<int> radius;
    /// Model queries, including the one that produced the recommendation.
    int forward_passes = 0;
    std::vector<Probe> probes;
    Ranking original_ranking;
    Pag pag;
    /// Set when nothing was found; carries the remediation hint.
    std::string message;

    [[nodiscard]] bool found() const { return !explanation.empty(); }
};

/// Replacement pool. `std::nullopt` accepts any changed top-1.
using Pool = std::optional<std::set<ItemId>>;

/// Probe error carrying the candidate set that was being tested.
class ProbeError : public Error {
public:
    ProbeError(const std::string& what, std::vector<ItemId> removed) : Error(what), removed_(std::move(removed)) {}
    [[nodiscard]] const std::vector<ItemId>& removed() const { return removed_; }

private:
    std::vector<ItemId> removed_;
};

struct ExplainConfig {
    DiscoveryConfig discovery;
    std::size_t top_k = 5;
    /// Restrict replacements to the original top-k minus the top-1.
    bool use_pool = true;
    /// Overrides the Fisher-z sample size (default: attention row count, or
    /// kPopulationSampleSize for synthetic factors).
    std::int64_t effective_sample_size = 0;
    ArrowheadReading reading = ArrowheadReading::Strict;
};

/// Radius-ordered search over PI-sets of the recommendation node (the
/// highest index of `g`), querying the model on S \ E until the top-1
/// changes to a pool member. Counts the query that produced `rec` as the
/// first forward pass.
ExplanationResult find_explanation(const Pag& g, Recommender& model, const Session& s, ItemId rec, const Pool& pool,
                                   std::size_t top_k = 5, ArrowheadReading reading = ArrowheadReading::Strict);

/// Full pipeline: recommend, append the recommendation, read attention,
/// learn the PAG over S + rec, then search for an explanation.
ExplanationResult explain_session(const Session& s, Recommender& model, const ExplainConfig& cfg);

/// Pool built from a ranking: everything after the top-1.
std::set<ItemId> pool_from_ranking(const Ranking& ranking);

/// Learns the PAG over the given tokens from the model's attention.
DiscoveryResult discover_from_attention(const Attention& attention, std::vector<ItemId> tokens,
                                        const DiscoveryConfig& cfg, std::int64_t effective_sample_size = 0);

}  // namespace attncause
