#include "attncause/explain/pi.hpp"

#include <algorithm>
#include <map>

#include "../discovery/subsets.hpp"

namespace attncause {

namespace {

bool arrowhead_into(const Pag& g, NodeIndex from, NodeIndex into, ArrowheadReading reading) {
    const EdgeMark m = g.mark_at(from, into);
    return m == EdgeMark::Arrow || (reading == ArrowheadReading::Permissive && m == EdgeMark::Circle);
}

/// Extending a PI-path ending (prev, cur) by `next` keeps it a PI-path.
bool extends(const Pag& g, NodeIndex prev, NodeIndex cur, NodeIndex next, ArrowheadReading reading) {
    return !g.adjacent(prev, next) && arrowhead_into(g, prev, cur, reading) && arrowhead_into(g, next, cur, reading);
}

}  // namespace

bool is_pi_path(const Pag& g, std::span<const NodeIndex> path, ArrowheadReading reading) {
    if (path.size() < 2) throw Error("a PI-path needs at least two nodes");
    for (std::size_t i = 0; i < path.size(); ++i) {
        for (std::size_t j = i + 1; j < path.size(); ++j)
            if (path[i] == path[j]) throw Error("PI-path nodes must be distinct");
    }
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!g.adjacent(path[i], path[i + 1])) {
            throw Error("consecutive path nodes " + std::to_string(path[i]) + " and " + std::to_string(path[i + 1]) +
                        " are not adjacent");
        }
    }
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        if (!extends(g, path[i - 1], path[i], path[i + 1], reading)) return false;
    }
    return true;
}

PiTree::PiTree(NodeIndex root, int node_count)
    : root_(root), depth_(node_count, -1), parent_(node_count, -1), paths_(node_count) {
    depth_.at(root) = 0;
    paths_[root] = {root};
}

void PiTree::attach(NodeIndex v, std::vector<NodeIndex> path) {
    depth_.at(v) = static_cast<int>(path.size()) - 1;
    parent_[v] = path[path.size() - 2];
    paths_[v] = std::move(path);
}

std::vector<NodeIndex> PiTree::members() const {
    std::vector<NodeIndex> out;
    for (NodeIndex v = 0; v < static_cast<int>(depth_.size()); ++v)
        if (v != root_ && depth_[v] > 0) out.push_back(v);
    return out;
}

PiTree build_pi_tree(const Pag& g, NodeIndex root, ArrowheadReading reading) {
    if (!g.contains(root)) throw UnknownNodeError("unknown root node " + std::to_string(root));
    PiTree tree(root, g.size());
    std::vector<std::vector<NodeIndex>> frontier;
    for (NodeIndex v : g.neighbors(root)) frontier.push_back({root, v});

    while (!frontier.empty()) {
        // Newly reached nodes at this depth: keep the preferred witness.
        std::map<NodeIndex, const std::vector<NodeIndex>*> best;
        for (const auto& path : frontier) {
            const NodeIndex v = path.back();
            if (tree.contains(v)) continue;
            auto [it, fresh] = best.emplace(v, &path);
            if (!fresh) {
                const auto& cur = *it->second;
                const NodeIndex pa = path[path.size() - 2];
                const NodeIndex pb = cur[cur.size() - 2];
                if (pa < pb || (pa == pb && path < cur)) it->second = &path;
            }
        }
        for (const auto& [v, path] : best) tree.attach(v, *path);

        std::vector<std::vector<NodeIndex>> next;
        for (const auto& path : frontier) {
            const NodeIndex prev = path[path.size() - 2];
            const NodeIndex cur = path.back();
            for (NodeIndex w : g.neighbors(cur)) {
                if (std::find(path.begin(), path.end(), w) != path.end()) continue;
                if (!extends(g, prev, cur, w, reading)) continue;
                auto longer = path;
                longer.push_back(w);
                next.push_back(std::move(longer));
            }
        }
        frontier = std::move(next);
    }
    return tree;
}

bool pi_closed(const Pag& g, NodeIndex root, std::span<const NodeIndex> members, ArrowheadReading reading) {
    std::vector<char> allowed(g.size(), 0);
    for (NodeIndex v : members) allowed.at(v) = 1;
    std::vector<char> reached(g.size(), 0);
    std::vector<char> on_path(g.size(), 0);
    std::size_t remaining = members.size();
    on_path[root] = 1;

    std::vector<NodeIndex> path{root};
    auto dfs = [&](auto&& self) -> void {
        const NodeIndex cur = path.back();
        for (NodeIndex w : g.neighbors(cur)) {
            if (!allowed[w] || on_path[w]) continue;
            if (path.size() >= 2 && !extends(g, path[path.size() - 2], cur, w, reading)) continue;
            if (!reached[w]) {
                reached[w] = 1;
                --remaining;
            }
            if (remaining == 0) return;
            path.push_back(w);
            on_path[w] = 1;
            self(self);
            on_path[w] = 0;
            path.pop_back();
            if (remaining == 0) return;
        }
    };
    if (remaining > 0) dfs(dfs);
    return remaining == 0;
}

bool pi_set_before(const PiSet& a, const PiSet& b) {
    // Equal sizes: compare depth sums exactly, i.e. mean depths.
    const long lhs = static_cast<long>(a.depth_sum) * static_cast<long>(b.members.size());
    const long rhs = static_cast<long>(b.depth_sum) * static_cast<long>(a.members.size());
    if (lhs != rhs) return lhs < rhs;
    // Recency: the latest positions decide first.
    const auto n = std::min(a.members.size(), b.members.size());
    for (std::size_t i = 1; i <= n; ++i) {
        const NodeIndex x = a.members[a.members.size() - i];
        const NodeIndex y = b.members[b.members.size() - i];
        if (x != y) return x > y;
    }
    if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
    return a.members < b.members;
}

std::vector<PiSet> enumerate_pi_sets(const PiTree& tree, const Pag& g, int r, ArrowheadReading reading) {
    if (r < 1) throw Error("radius must be at least 1");
    std::vector<NodeIndex> candidates;
    for (NodeIndex v : tree.members())
        if (v < tree.root()) candidates.push_back(v);

    std::vector<PiSet> out;
    detail::for_each_combination(candidates, r, [&](const std::vector<NodeIndex>& subset) {
        if (pi_closed(g, tree.root(), subset, reading)) {
            PiSet s{subset, r, 0};
            for (NodeIndex v : subset) s.depth_sum += tree.depth(v);
            out.push_back(std::move(s));
        }
        return false;
    });
    std::sort(out.begin(), out.end(), pi_set_before);
    return out;
}

}  // namespace attncause
