#include <algorithm>
#include <deque>
#include <set>

#include "attncause/discovery/fci.hpp"
#include "subsets.hpp"

namespace attncause {

void DiscoveryConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
    if (max_cond_size && *max_cond_size < 0) throw Error("max_cond_size must be non-negative");
}

namespace {

int conditioning_cap(const IndependenceTest& ci, const DiscoveryConfig& cfg) {
    int cap = ci.max_conditioning();
    if (cfg.max_cond_size) cap = std::min(cap, *cfg.max_cond_size);
    return cap;
}

std::vector<NodeIndex> others(const std::set<NodeIndex>& adj, NodeIndex excluded) {
    std::vector<NodeIndex> out;
    for (NodeIndex v : adj)
        if (v != excluded) out.push_back(v);
    return out;
}

}  // namespace

SkeletonResult learn_skeleton(IndependenceTest& ci, std::vector<ItemId> labels, const DiscoveryConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(labels.size()) != ci.variables()) {
        throw Error("independence test covers " + std::to_string(ci.variables()) + " variables but " +
                    std::to_string(labels.size()) + " nodes were given");
    }
    SkeletonResult out{Pag::complete(std::move(labels)), {}};
    Pag& g = out.graph;
    const int cap = conditioning_cap(ci, cfg);

    for (int k = 0; k <= cap; ++k) {
        bool any_candidate = false;
        for (NodeIndex x = 0; x < g.size(); ++x) {
            for (NodeIndex y = x + 1; y < g.size(); ++y) {
                if (!g.adjacent(x, y)) continue;
                const std::vector<NodeIndex> from_x = others(g.neighbors(x), y);
                const std::vector<NodeIndex> from_y = others(g.neighbors(y), x);
                if (static_cast<int>(from_x.size()) < k && static_cast<int>(from_y.size()) < k) continue;
                any_candidate = true;
                std::optional<std::vector<NodeIndex>> separator;
                auto probe = [&](const std::vector<NodeIndex>& z) {
                    if (ci.test(x, y, z).independent) {
                        separator = z;
                        return true;
                    }
                    return false;
                };
                if (!detail::for_each_combination(from_x, k, probe) && from_y != from_x) {
                    detail::for_each_combination(from_y, k, probe);
                }
                if (separator) {
                    g.remove_edge(x, y);
                    out.sepsets.record(x, y, *separator);
                }
            }
        }
        if (!any_candidate) break;
    }
    return out;
}

std::vector<NodeIndex> possible_dsep_set(const Pag& g, NodeIndex x) {
    // Breadth-first over directed edge states (prev -> cur).
    std::set<std::pair<NodeIndex, NodeIndex>> seen;
    std::deque<std::pair<NodeIndex, NodeIndex>> queue;
    std::set<NodeIndex> reached;
    for (NodeIndex v : g.neighbors(x)) {
        seen.emplace(x, v);
        queue.emplace_back(x, v);
        reached.insert(v);
    }
    while (!queue.empty()) {
        auto [u, v] = queue.front();
        queue.pop_front();
        for (NodeIndex w : g.neighbors(v)) {
            if (w == u || w == x) continue;
            const bool collider = g.mark_at(u, v) == EdgeMark::Arrow && g.mark_at(w, v) == EdgeMark::Arrow;
            const bool triangle = g.adjacent(u, w);
            if (!collider && !triangle) continue;
            if (seen.emplace(v, w).second) {
                queue.emplace_back(v, w);
                reached.insert(w);
            }
        }
    }
    return {reached.begin(), reached.end()};
}

int refine_with_possible_dsep(IndependenceTest& ci, Pag& skeleton, const Pag& oriented, SepsetTable& sepsets,
                              const DiscoveryConfig& cfg) {
    const int cap = conditioning_cap(ci, cfg);
    std::vector<std::vector<NodeIndex>> pds(oriented.size());
    for (NodeIndex x = 0; x < oriented.size(); ++x) pds[x] = possible_dsep_set(oriented, x);

    int removed = 0;
    for (NodeIndex x = 0; x < skeleton.size(); ++x) {
        for (NodeIndex y = x + 1; y < skeleton.size(); ++y) {
            if (!skeleton.adjacent(x, y)) continue;
            std::optional<std::vector<NodeIndex>> separator;
            auto probe = [&](const std::vector<NodeIndex>& z) {
                if (ci.test(x, y, z).independent) {
                    separator = z;
                    return true;
                }
                return false;
            };
            for (const auto& [a, b] : {std::pair{x, y}, std::pair{y, x}}) {
                std::vector<NodeIndex> pool;
                for (NodeIndex v : pds[a])
                    if (v != b) pool.push_back(v);
                const int top = std::min<int>(cap, static_cast<int>(pool.size()));
                for (int k = 0; k <= top && !separator; ++k) detail::for_each_combination(pool, k, probe);
                if (separator) break;
            }
            if (separator) {
                skeleton.remove_edge(x, y);
                sepsets.record(x, y, *separator);
                ++removed;
            }
        }
    }
    return removed;
}

}  // namespace attncause
