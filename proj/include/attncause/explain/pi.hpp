#pragma once

#include <span>
#include <vector>

#include "attncause/graph/pag.hpp"

namespace attncause {

/// Whether a Circle endpoint counts as a possible arrowhead when testing
/// the inner nodes of a potential-influence path.
enum class ArrowheadReading { Strict, Permissive };

/// A path whose every inner node V (with path neighbours U, W) has
/// arrowheads into it from both sides while U and W are non-adjacent.
/// A single edge qualifies. Throws if consecutive nodes are not adjacent.
bool is_pi_path(const Pag& g, std::span<const NodeIndex> path,
                ArrowheadReading reading = ArrowheadReading::Strict);

/// Potential-influence paths from the root, kept as a tree: every reachable
/// node appears once, at the length of its shortest PI-path.
class PiTree {
public:
    PiTree() = default;
    PiTree(NodeIndex root, int node_count);

    [[nodiscard]] NodeIndex root() const { return root_; }
    [[nodiscard]] bool contains(NodeIndex v) const { return v >= 0 && v < static_cast<int>(depth_.size()) && depth_[v] >= 0; }
    /// 0 for the root, -1 for nodes without a PI-path.
    [[nodiscard]] int depth(NodeIndex v) const { return depth_.at(v); }
    [[nodiscard]] NodeIndex parent(NodeIndex v) const { return parent_.at(v); }
    /// The shortest PI-path root -> v retained for v.
    [[nodiscard]] const std::vector<NodeIndex>& path_to(NodeIndex v) const { return paths_.at(v); }
    /// Members other than the root, ascending by index.
    [[nodiscard]] std::vector<NodeIndex> members() const;

    void attach(NodeIndex v, std::vector<NodeIndex> path);

private:
    NodeIndex root_ = -1;
    std::vector<int> depth_;
    std::vector<NodeIndex> parent_;
    std::vector<std::vector<NodeIndex>> paths_;
};

/// Breadth-first over simple PI-paths. Among equally short paths to a node,
/// the one with the smallest parent index (then lexicographically smallest)
/// is retained.
PiTree build_pi_tree(const Pag& g, NodeIndex root, ArrowheadReading reading = ArrowheadReading::Strict);

struct PiSet {
    std::vector<NodeIndex> members;  ///< ascending
    int radius = 0;
    int depth_sum = 0;

    [[nodiscard]] double mean_depth() const { return members.empty() ? 0.0 : double(depth_sum) / members.size(); }
    friend bool operator==(const PiSet&, const PiSet&) = default;
};

/// True when every member reaches the root by a PI-path lying inside
/// `members` ∪ {root}.
bool pi_closed(const Pag& g, NodeIndex root, std::span<const NodeIndex> members,
               ArrowheadReading reading = ArrowheadReading::Strict);

/// Candidate explanation order: ascending mean depth, then sets holding the
/// more recent positions first.
bool pi_set_before(const PiSet& a, const PiSet& b);

/// All size-r sets of tree nodes that precede the root and are closed under
/// PI-paths, in search order.
std::vector<PiSet> enumerate_pi_sets(const PiTree& tree, const Pag& g, int r,
                                     ArrowheadReading reading = ArrowheadReading::Strict);

}  // namespace attncause
