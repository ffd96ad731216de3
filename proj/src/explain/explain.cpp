#include "attncause/explain/explain.hpp"

#include <algorithm>
#include <sstream>

namespace attncause {

std::set<ItemId> pool_from_ranking(const Ranking& ranking) {
    std::set<ItemId> pool;
    for (std::size_t i = 1; i < ranking.size(); ++i) pool.insert(ranking[i].item);
    return pool;
}

DiscoveryResult discover_from_attention(const Attention& attention, std::vector<ItemId> tokens,
                                        const DiscoveryConfig& cfg, std::int64_t effective_sample_size) {
    if (attention.tokens() != static_cast<Eigen::Index>(tokens.size())) {
        throw FormatError("attention covers " + std::to_string(attention.tokens()) + " tokens, expected " +
                          std::to_string(tokens.size()));
    }
    PartialCorrelationTest ci(correlation_from_attention(attention, effective_sample_size), cfg.alpha);
    return learn_pag(ci, std::move(tokens), cfg);
}

ExplanationResult find_explanation(const Pag& g, Recommender& model, const Session& s, ItemId rec, const Pool& pool,
                                   std::size_t top_k, ArrowheadReading reading) {
    s.validate();
    if (g.size() != static_cast<int>(s.size()) + 1) {
        throw Error("graph must cover the session plus the recommendation");
    }
    const NodeIndex root = g.index_of(rec);
    if (root != g.size() - 1) throw Error("the recommendation must be the last node of the graph");

    ExplanationResult out;
    out.recommendation = rec;
    out.pag = g;
    out.forward_passes = 1;

    const PiTree tree = build_pi_tree(g, root, reading);
    const int n = static_cast<int>(s.size());
    for (int r = 1; r <= n - 1; ++r) {
        for (const PiSet& candidate : enumerate_pi_sets(tree, g, r, reading)) {
            Probe probe;
            for (NodeIndex v : candidate.members) probe.removed.push_back(g.label(v));
            const std::vector<ItemId> reduced = without(s.items, probe.removed);
            Ranking ranking;
            try {
                ranking = model.recommend(reduced, top_k);
            } catch (const std::exception& e) {
                throw ProbeError(std::string("model query failed: ") + e.what(), probe.removed);
            }
            ++out.forward_passes;
            if (!ranking.empty()) probe.top1 = ranking.front().item;
            probe.accepted = probe.top1 && *probe.top1 != rec && (!pool || pool->contains(*probe.top1));
            out.probes.push_back(probe);
            if (probe.accepted) {
                out.explanation = probe.removed;
                out.alternative = probe.top1;
                out.radius = r;
                return out;
            }
        }
    }
    out.message = "no explanation found at the current significance level; consider a higher alpha";
    return out;
}

ExplanationResult explain_session(const Session& s, Recommender& model, const ExplainConfig& cfg) {
    s.validate();
    if (s.size() < 2) throw Error("explanations need a session of at least two items");
    cfg.discovery.validate();

    Ranking ranking = model.recommend(s.items, cfg.top_k);
    if (ranking.empty()) throw Error("model returned an empty ranking");
    const ItemId rec = ranking.front().item;

    std::vector<ItemId> tokens = s.items;
    tokens.push_back(rec);
    const Attention attention = model.attention(tokens);
    DiscoveryResult learned = discover_from_attention(attention, tokens, cfg.discovery, cfg.effective_sample_size);

    Pool pool;
    if (cfg.use_pool) pool = pool_from_ranking(ranking);
    ExplanationResult out = find_explanation(learned.pag, model, s, rec, pool, cfg.top_k, cfg.reading);
    out.original_ranking = std::move(ranking);
    if (!out.found()) {
        std::ostringstream msg;
        msg << "no explanation found at alpha=" << cfg.discovery.alpha << "; consider a higher alpha";
        out.message = msg.str();
    }
    return out;
}

}  // namespace attncause
