#include "attncause/model/recommender.hpp"

#include <algorithm>

namespace attncause {

void Session::validate() const {
    if (items.empty()) throw Error("session is empty");
    std::vector<ItemId> sorted = items;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw Error("session contains a repeated item");
    }
}

std::vector<ItemId> without(std::span<const ItemId> items, std::span<const ItemId> removed) {
    std::vector<ItemId> out;
    for (ItemId v : items)
        if (std::find(removed.begin(), removed.end(), v) == removed.end()) out.push_back(v);
    return out;
}

}  // namespace attncause
