#pragma once

#include "attncause/explain/explain.hpp"

namespace attncause {

/// Attention hill-climbing baseline. Session items are ranked by their
/// weight in the recommendation token's attention row;
/// items are removed cumulatively in that order, querying the model after
/// each addition, until the top-1 changes to a pool member. At most n − 1
/// items are removed.
ExplanationResult atten_baseline(Recommender& model, const Session& s, ItemId rec, const Pool& pool,
                                 std::size_t top_k = 5);

/// Session positions ordered by descending attention weight in the last
/// row of `attention` (ties: earlier position first).
std::vector<int> attention_order(const Attention& attention, int session_length);

}  // namespace attncause
