#pragma once

#include <json.hpp>

#include "attncause/model/sem.hpp"
#include "attncause/model/trace.hpp"

namespace attncause {

nlohmann::json to_json(const SemSpec& spec);
SemSpec sem_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SyntheticWorld& world);
SyntheticWorld world_from_json(const nlohmann::json& j);

/// Records a synthetic world as a trace line: top-k, the abductive attention
/// factor and the rankings for every removal subset up to `max_removed` items
/// (all proper subsets when negative).
TraceSession trace_from_world(const SyntheticWorld& world, std::size_t k, int max_removed = -1);

}  // namespace attncause
