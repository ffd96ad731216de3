#include "attncause/model/simulate.hpp"

#include "../discovery/subsets.hpp"

namespace attncause {

using nlohmann::json;

json to_json(const SemSpec& spec) {
    json edges = json::array();
    for (const SemEdge& e : spec.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
    return {{"observed", spec.observed},
            {"latent", spec.latent},
            {"edges", std::move(edges)},
            {"noise_variances", spec.noise_variances},
            {"seed", spec.seed}};
}

SemSpec sem_from_json(const json& j) {
    SemSpec spec;
    try {
        spec.observed = j.at("observed").get<int>();
        spec.latent = j.value("latent", 0);
        for (const auto& e : j.at("edges")) {
            spec.edges.push_back({e.at("from").get<int>(), e.at("to").get<int>(), e.at("weight").get<double>()});
        }
        spec.noise_variances = j.at("noise_variances").get<std::vector<double>>();
        spec.seed = j.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed SEM spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

json to_json(const SyntheticWorld& world) {
    json values = json::array();
    for (const auto& [item, v] : world.values) values.push_back({{"item", item}, {"value", v}});
    return {{"id", world.id}, {"sem", to_json(world.sem)}, {"items", world.session.items}, {"values", std::move(values)}};
}

SyntheticWorld world_from_json(const json& j) {
    SyntheticWorld w;
    try {
        w.id = j.at("id").get<std::string>();
        w.sem = sem_from_json(j.at("sem"));
        w.session.items = j.at("items").get<std::vector<ItemId>>();
        for (const auto& v : j.at("values")) w.values[v.at("item").get<ItemId>()] = v.at("value").get<double>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed synthetic world: ") + e.what());
    }
    w.session.validate();
    return w;
}

TraceSession trace_from_world(const SyntheticWorld& world, std::size_t k, int max_removed) {
    SemRecommender model(world.sem, world.values);
    TraceSession t;
    t.session_id = world.id;
    t.items = world.session.items;
    t.topk = model.recommend(t.items, k);
    std::vector<ItemId> tokens = t.items;
    tokens.push_back(t.topk.front().item);
    t.attention = model.attention(tokens);
    t.recommendation_appended = true;

    const int n = static_cast<int>(t.items.size());
    const int top = max_removed < 0 ? n - 1 : std::min(max_removed, n - 1);
    std::vector<ItemId> sorted = t.items;
    std::sort(sorted.begin(), sorted.end());
    for (int r = 1; r <= top; ++r) {
        detail::for_each_combination(sorted, r, [&](const std::vector<ItemId>& removed) {
            t.variants.push_back({removed, model.recommend(without(t.items, removed), k)});
            return false;
        });
    }
    return t;
}

}  // namespace attncause
