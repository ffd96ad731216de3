#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "attncause/error.hpp"

namespace attncause {

using ItemId = std::int64_t;

/// Position of a node in the extended session. Session items occupy
/// 0..n-1 in interaction order; an appended recommendation takes index n.
using NodeIndex = int;

enum class EdgeMark : std::uint8_t { Arrow, Tail, Circle };

char mark_symbol(EdgeMark m, bool left_end);

/// Endpoint marks of one edge, stored for the ordered pair (low, high).
struct EndMarks {
    EdgeMark at_low = EdgeMark::Circle;
    EdgeMark at_high = EdgeMark::Circle;

    friend bool operator==(const EndMarks&, const EndMarks&) = default;
};

/// Partial ancestral graph over a dense, index-ordered node set.
///
/// Each edge is held once under its unordered pair, so the mark "at y on
/// {x, y}" answers the same regardless of query order.
class Pag {
public:
    using EdgeKey = std::pair<NodeIndex, NodeIndex>;
    /// Called as (x, y, before, after) whenever the mark at y on {x, y} changes.
    using MarkObserver = std::function<void(NodeIndex, NodeIndex, EdgeMark, EdgeMark)>;

    Pag() = default;
    explicit Pag(std::vector<ItemId> labels);

    /// All pairs connected with o-o edges.
    static Pag complete(std::vector<ItemId> labels);

    [[nodiscard]] int size() const { return static_cast<int>(labels_.size()); }
    [[nodiscard]] ItemId label(NodeIndex x) const;
    [[nodiscard]] const std::vector<ItemId>& labels() const { return labels_; }
    [[nodiscard]] NodeIndex index_of(ItemId label) const;
    [[nodiscard]] bool contains(NodeIndex x) const { return x >= 0 && x < size(); }

    [[nodiscard]] bool adjacent(NodeIndex x, NodeIndex y) const;
    /// Mark at y on the edge {x, y}.
    [[nodiscard]] EdgeMark mark_at(NodeIndex x, NodeIndex y) const;
    [[nodiscard]] const std::set<NodeIndex>& neighbors(NodeIndex x) const;
    [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }
    [[nodiscard]] const std::map<EdgeKey, EndMarks>& edges() const { return edges_; }

    void add_edge(NodeIndex x, NodeIndex y, EdgeMark at_x = EdgeMark::Circle,
                  EdgeMark at_y = EdgeMark::Circle);
    void remove_edge(NodeIndex x, NodeIndex y);

    /// Refines the mark at y on {x, y}. Circle may become anything; a settled
    /// Arrow or Tail only accepts itself (or Circle, which is a no-op).
    void set_mark(NodeIndex x, NodeIndex y, EdgeMark m);

    /// Replaces every mark with Circle, keeping the adjacencies.
    void reset_marks();

    void set_observer(MarkObserver observer) { observer_ = std::move(observer); }

    /// u *-> v <-* w with u and w non-adjacent.
    [[nodiscard]] bool is_unshielded_collider(NodeIndex u, NodeIndex v, NodeIndex w) const;

    friend bool operator==(const Pag& a, const Pag& b) {
        return a.labels_ == b.labels_ && a.edges_ == b.edges_;
    }

private:
    void require(NodeIndex x) const;
    static EdgeKey key(NodeIndex x, NodeIndex y) { return x < y ? EdgeKey{x, y} : EdgeKey{y, x}; }

    std::vector<ItemId> labels_;
    std::map<ItemId, NodeIndex> by_label_;
    std::map<EdgeKey, EndMarks> edges_;
    std::vector<std::set<NodeIndex>> adjacency_;
    MarkObserver observer_;
};

/// Canonical text: a `nodes` header, then one `X <m>-<m> Y` line per edge in
/// index order, e.g. `3 o-> 7`, `2 <-> 7`, `1 --> 7`.
std::string to_text(const Pag& g);
Pag parse_pag(std::string_view text);

/// Graphviz rendering; edge labels carry the textual marks.
std::string to_dot(const Pag& g);

/// Separating sets recorded for pairs removed during skeleton search.
class SepsetTable {
public:
    void record(NodeIndex x, NodeIndex y, std::vector<NodeIndex> separator);
    void erase(NodeIndex x, NodeIndex y);
    [[nodiscard]] bool has(NodeIndex x, NodeIndex y) const;
    [[nodiscard]] const std::vector<NodeIndex>& get(NodeIndex x, NodeIndex y) const;
    [[nodiscard]] bool separates_with(NodeIndex x, NodeIndex y, NodeIndex v) const;
    [[nodiscard]] std::size_t size() const { return sets_.size(); }
    [[nodiscard]] const auto& entries() const { return sets_; }

private:
    std::map<std::pair<NodeIndex, NodeIndex>, std::vector<NodeIndex>> sets_;
};

}  // namespace attncause
