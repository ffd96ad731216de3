#pragma once

#include <vector>

namespace attncause::detail {

/// Calls `visit(subset)` for every size-k subset of `pool` in lexicographic
/// order of positions; stops early when `visit` returns true.
template <typename T, typename Visit>
bool for_each_combination(const std::vector<T>& pool, int k, Visit&& visit) {
    const int n = static_cast<int>(pool.size());
    if (k < 0 || k > n) return false;
    std::vector<int> pos(k);
    for (int i = 0; i < k; ++i) pos[i] = i;
    std::vector<T> subset(k);
    while (true) {
        for (int i = 0; i < k; ++i) subset[i] = pool[pos[i]];
        if (visit(subset)) return true;
        int i = k - 1;
        while (i >= 0 && pos[i] == n - k + i) --i;
        if (i < 0) return false;
        ++pos[i];
        for (int j = i + 1; j < k; ++j) pos[j] = pos[j - 1] + 1;
    }
}

}  // namespace attncause::detail
