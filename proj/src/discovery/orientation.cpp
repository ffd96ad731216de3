#include <algorithm>
#include <deque>
#include <set>

#include "attncause/discovery/fci.hpp"

namespace attncause {

namespace {

constexpr EdgeMark kArrow = EdgeMark::Arrow;
constexpr EdgeMark kTail = EdgeMark::Tail;
constexpr EdgeMark kCircle = EdgeMark::Circle;

std::vector<NodeIndex> neighbor_list(const Pag& g, NodeIndex v) { return {g.neighbors(v).begin(), g.neighbors(v).end()}; }

/// a -> b : tail at a, arrow at b.
bool directed(const Pag& g, NodeIndex a, NodeIndex b) {
    return g.adjacent(a, b) && g.mark_at(b, a) == kTail && g.mark_at(a, b) == kArrow;
}

bool refine(Pag& g, NodeIndex x, NodeIndex y, EdgeMark m) {
    if (g.mark_at(x, y) == m) return false;
    g.set_mark(x, y, m);
    return true;
}

/// Uncovered potentially directed paths from `from` whose second node is
/// `first`. Visits each complete path ending at a node; `visit(path)`
/// returning true stops the search.
template <typename Visit>
bool uncovered_pd_paths(const Pag& g, NodeIndex from, NodeIndex first, NodeIndex avoid, Visit&& visit) {
    auto pd_edge = [&](NodeIndex a, NodeIndex b) {
        return g.mark_at(b, a) != kArrow && g.mark_at(a, b) != kTail;
    };
    if (first == avoid || !pd_edge(from, first)) return false;
    std::vector<NodeIndex> path{from, first};
    std::vector<char> on_path(g.size(), 0);
    on_path[from] = on_path[first] = 1;
    auto dfs = [&](auto&& self) -> bool {
        if (visit(path)) return true;
        const NodeIndex cur = path.back();
        const NodeIndex prev = path[path.size() - 2];
        for (NodeIndex next : g.neighbors(cur)) {
            if (on_path[next] || next == avoid) continue;
            if (g.adjacent(prev, next) || !pd_edge(cur, next)) continue;
            path.push_back(next);
            on_path[next] = 1;
            const bool stop = self(self);
            on_path[next] = 0;
            path.pop_back();
            if (stop) return true;
        }
        return false;
    };
    return dfs(dfs);
}

}  // namespace

void orient_colliders(Pag& g, const SepsetTable& sepsets) {
    for (NodeIndex v = 0; v < g.size(); ++v) {
        const auto adj = neighbor_list(g, v);
        for (std::size_t a = 0; a < adj.size(); ++a) {
            for (std::size_t b = a + 1; b < adj.size(); ++b) {
                const NodeIndex u = adj[a];
                const NodeIndex w = adj[b];
                if (g.adjacent(u, w)) continue;
                if (!sepsets.separates_with(u, w, v)) {
                    g.set_mark(u, v, kArrow);
                    g.set_mark(w, v, kArrow);
                }
            }
        }
    }
}

namespace rules {

bool r1(Pag& g) {
    bool changed = false;
    for (NodeIndex b = 0; b < g.size(); ++b) {
        for (NodeIndex a : neighbor_list(g, b)) {
            if (g.mark_at(a, b) != kArrow) continue;
            for (NodeIndex c : neighbor_list(g, b)) {
                if (c == a || g.adjacent(a, c) || g.mark_at(c, b) != kCircle) continue;
                changed |= refine(g, c, b, kTail);
                changed |= refine(g, b, c, kArrow);
            }
        }
    }
    return changed;
}

bool r2(Pag& g) {
    bool changed = false;
    for (NodeIndex a = 0; a < g.size(); ++a) {
        for (NodeIndex c : neighbor_list(g, a)) {
            if (g.mark_at(a, c) != kCircle) continue;
            for (NodeIndex b : neighbor_list(g, a)) {
                if (b == c || !g.adjacent(b, c)) continue;
                const bool via_first = directed(g, a, b) && g.mark_at(b, c) == kArrow;
                const bool via_second = g.mark_at(a, b) == kArrow && directed(g, b, c);
                if (via_first || via_second) {
                    changed |= refine(g, a, c, kArrow);
                    break;
                }
            }
        }
    }
    return changed;
}

bool r3(Pag& g) {
    bool changed = false;
    for (NodeIndex b = 0; b < g.size(); ++b) {
        for (NodeIndex d : neighbor_list(g, b)) {
            if (g.mark_at(d, b) != kCircle) continue;
            std::vector<NodeIndex> common;
            for (NodeIndex v : g.neighbors(b))
                if (v != d && g.adjacent(v, d)) common.push_back(v);
            bool fire = false;
            for (std::size_t i = 0; i < common.size() && !fire; ++i) {
                for (std::size_t j = i + 1; j < common.size() && !fire; ++j) {
                    const NodeIndex a = common[i];
                    const NodeIndex c = common[j];
                    fire = !g.adjacent(a, c) && g.mark_at(a, b) == kArrow && g.mark_at(c, b) == kArrow &&
                           g.mark_at(a, d) == kCircle && g.mark_at(c, d) == kCircle;
                }
            }
            if (fire) changed |= refine(g, d, b, kArrow);
        }
    }
    return changed;
}

bool r4(Pag& g, const SepsetTable& sepsets) {
    bool changed = false;
    for (NodeIndex b = 0; b < g.size(); ++b) {
        for (NodeIndex c : neighbor_list(g, b)) {
            if (g.mark_at(c, b) != kCircle) continue;
            for (NodeIndex a : neighbor_list(g, b)) {
                if (a == c || !directed(g, a, c) || g.mark_at(b, a) != kArrow) continue;
                // Breadth-first over simple paths θ ... a, b ending in θ not adjacent to c.
                std::deque<std::vector<NodeIndex>> queue;
                queue.push_back({b, a});
                std::optional<NodeIndex> theta;
                while (!queue.empty() && !theta) {
                    std::vector<NodeIndex> path = std::move(queue.front());
                    queue.pop_front();
                    const NodeIndex v = path.back();
                    for (NodeIndex w : g.neighbors(v)) {
                        if (w == c || std::find(path.begin(), path.end(), w) != path.end()) continue;
                        if (g.mark_at(w, v) != kArrow) continue;
                        if (!g.adjacent(w, c)) {
                            theta = w;
                            break;
                        }
                        if (directed(g, w, c) && g.mark_at(v, w) == kArrow) {
                            auto next = path;
                            next.push_back(w);
                            queue.push_back(std::move(next));
                        }
                    }
                }
                if (!theta) continue;
                if (!sepsets.has(*theta, c)) continue;
                if (sepsets.separates_with(*theta, c, b)) {
                    changed |= refine(g, c, b, kTail);
                    changed |= refine(g, b, c, kArrow);
                } else {
                    changed |= refine(g, a, b, kArrow);
                    changed |= refine(g, c, b, kArrow);
                    changed |= refine(g, b, c, kArrow);
                }
                break;
            }
        }
    }
    return changed;
}

bool r8(Pag& g) {
    bool changed = false;
    for (NodeIndex a = 0; a < g.size(); ++a) {
        for (NodeIndex c : neighbor_list(g, a)) {
            if (g.mark_at(c, a) != kCircle || g.mark_at(a, c) != kArrow) continue;
            for (NodeIndex b : g.neighbors(a)) {
                if (b == c || !g.adjacent(b, c)) continue;
                if (g.mark_at(b, a) == kTail && g.mark_at(a, b) != kTail && directed(g, b, c)) {
                    changed |= refine(g, c, a, kTail);
                    break;
                }
            }
        }
    }
    return changed;
}

bool r9(Pag& g) {
    bool changed = false;
    for (NodeIndex a = 0; a < g.size(); ++a) {
        for (NodeIndex c : neighbor_list(g, a)) {
            if (g.mark_at(c, a) != kCircle || g.mark_at(a, c) != kArrow) continue;
            bool fire = false;
            for (NodeIndex b : g.neighbors(a)) {
                if (b == c || g.adjacent(b, c)) continue;
                fire = uncovered_pd_paths(g, a, b, -1, [&](const std::vector<NodeIndex>& p) {
                    return p.size() >= 3 && p.back() == c;
                });
                if (fire) break;
            }
            if (fire) changed |= refine(g, c, a, kTail);
        }
    }
    return changed;
}

bool r10(Pag& g) {
    bool changed = false;
    for (NodeIndex a = 0; a < g.size(); ++a) {
        for (NodeIndex c : neighbor_list(g, a)) {
            if (g.mark_at(c, a) != kCircle || g.mark_at(a, c) != kArrow) continue;
            std::vector<NodeIndex> parents;
            for (NodeIndex v : g.neighbors(c))
                if (v != a && directed(g, v, c)) parents.push_back(v);
            if (parents.size() < 2) continue;
            // First hops of uncovered p.d. paths from a to each parent.
            std::vector<std::set<NodeIndex>> hops(parents.size());
            for (std::size_t i = 0; i < parents.size(); ++i) {
                for (NodeIndex first : g.neighbors(a)) {
                    if (first == c) continue;
                    const bool reaches = uncovered_pd_paths(g, a, first, c, [&](const std::vector<NodeIndex>& p) {
                        return p.back() == parents[i];
                    });
                    if (reaches) hops[i].insert(first);
                }
            }
            bool fire = false;
            for (std::size_t i = 0; i < parents.size() && !fire; ++i)
                for (std::size_t j = i + 1; j < parents.size() && !fire; ++j)
                    for (NodeIndex mu : hops[i]) {
                        for (NodeIndex omega : hops[j]) {
                            if (mu != omega && !g.adjacent(mu, omega)) {
                                fire = true;
                                break;
                            }
                        }
                        if (fire) break;
                    }
            if (fire) changed |= refine(g, c, a, kTail);
        }
    }
    return changed;
}

}  // namespace rules

void apply_orientation_rules(Pag& g, const SepsetTable& sepsets, RuleSet rule_set) {
    bool changed = true;
    while (changed) {
        changed = false;
        changed |= rules::r1(g);
        changed |= rules::r2(g);
        changed |= rules::r3(g);
        changed |= rules::r4(g, sepsets);
        if (rule_set == RuleSet::Extended) {
            changed |= rules::r8(g);
            changed |= rules::r9(g);
            changed |= rules::r10(g);
        }
    }
}

}  // namespace attncause
