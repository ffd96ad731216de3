#pragma once

#include <span>
#include <vector>

#include "attncause/ci/correlation.hpp"
#include "attncause/graph/pag.hpp"

namespace attncause {

/// Ordered list of item interactions; position is temporal order.
struct Session {
    std::vector<ItemId> items;

    /// Throws unless non-empty and free of repeated items.
    void validate() const;
    [[nodiscard]] std::size_t size() const { return items.size(); }
};

struct ScoredItem {
    ItemId item = 0;
    double score = 0.0;

    friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

using Ranking = std::vector<ScoredItem>;

/// Behavioral contract of a pre-trained attention recommender. Identical
/// inputs must give identical outputs; rankings are by descending score and
/// never contain items of the queried session.
class Recommender {
public:
    virtual ~Recommender() = default;

    virtual Ranking recommend(std::span<const ItemId> session, std::size_t k) = 0;

    /// Last-layer attention over `tokens` (the session with the
    /// recommendation appended, for the abductive pass).
    virtual Attention attention(std::span<const ItemId> tokens) = 0;
};

/// Session items with `removed` taken out, order preserved.
std::vector<ItemId> without(std::span<const ItemId> items, std::span<const ItemId> removed);

}  // namespace attncause
