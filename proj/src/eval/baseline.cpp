#include "attncause/eval/baseline.hpp"

#include <algorithm>
#include <numeric>

namespace attncause {

std::vector<int> attention_order(const Attention& attention, int session_length) {
    if (attention.tokens() != session_length + 1) {
        throw FormatError("baseline needs attention over the session plus the recommendation");
    }
    const Eigen::Index row = attention.tokens() - 1;
    std::vector<int> order(session_length);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return attention.values(row, a) > attention.values(row, b);
    });
    return order;
}

ExplanationResult atten_baseline(Recommender& model, const Session& s, ItemId rec, const Pool& pool,
                                 std::size_t top_k) {
    s.validate();
    std::vector<ItemId> tokens = s.items;
    tokens.push_back(rec);
    const Attention attention = model.attention(tokens);
    const int n = static_cast<int>(s.size());
    const std::vector<int> order = attention_order(attention, n);

    ExplanationResult out;
    out.recommendation = rec;
    out.forward_passes = 1;
    std::vector<ItemId> removed;
    for (int step = 0; step < n - 1; ++step) {
        removed.push_back(s.items[order[step]]);
        Probe probe;
        probe.removed = removed;
        Ranking ranking;
        try {
            ranking = model.recommend(without(s.items, removed), top_k);
        } catch (const std::exception& e) {
            throw ProbeError(std::string("model query failed: ") + e.what(), removed);
        }
        ++out.forward_passes;
        if (!ranking.empty()) probe.top1 = ranking.front().item;
        probe.accepted = probe.top1 && *probe.top1 != rec && (!pool || pool->contains(*probe.top1));
        out.probes.push_back(probe);
        if (probe.accepted) {
            // Report the set in session order.
            for (ItemId v : s.items)
                if (std::find(removed.begin(), removed.end(), v) != removed.end()) out.explanation.push_back(v);
            out.alternative = probe.top1;
            out.radius = static_cast<int>(removed.size());
            return out;
        }
    }
    out.message = "attention baseline exhausted the session without a replacement";
    return out;
}

}  // namespace attncause
