#pragma once

#include <optional>
#include <vector>

#include "attncause/ci/ci_test.hpp"
#include "attncause/graph/pag.hpp"

namespace attncause {

enum class RuleSet {
    Core,      ///< R1–R4
    Extended,  ///< R1–R4 plus R8–R10 (the tail rules valid without selection bias)
};

enum class PossibleDsep {
    Auto,    ///< run only when collider orientation produced a bidirected edge
    Always,
    Never,
};

struct DiscoveryConfig {
    double alpha = 0.01;
    /// Caps |Z|; the test's own limit applies when unset or smaller.
    std::optional<int> max_cond_size;
    RuleSet rule_set = RuleSet::Core;
    PossibleDsep possible_dsep = PossibleDsep::Auto;

    void validate() const;
};

struct SkeletonResult {
    Pag graph;
    SepsetTable sepsets;
};

struct DiscoveryResult {
    Pag pag;
    SepsetTable sepsets;
    bool ran_possible_dsep = false;
    std::size_t ci_tests = 0;
};

/// Complete graph thinned by conditional independence, conditioning sets
/// of growing size drawn from the current adjacencies of either endpoint.
SkeletonResult learn_skeleton(IndependenceTest& ci, std::vector<ItemId> labels, const DiscoveryConfig& cfg);

/// Arrowheads at v for every unshielded u - v - w with v outside sepset(u, w).
void orient_colliders(Pag& g, const SepsetTable& sepsets);

/// Possible-D-Sep(x) over a collider-oriented graph: nodes reachable from x
/// along paths whose inner nodes are colliders or lie in triangles.
std::vector<NodeIndex> possible_dsep_set(const Pag& g, NodeIndex x);

/// Re-tests the remaining edges of `skeleton` against subsets of the
/// possible-d-sep sets computed on `oriented`. Returns the number of edges removed.
int refine_with_possible_dsep(IndependenceTest& ci, Pag& skeleton, const Pag& oriented, SepsetTable& sepsets,
                              const DiscoveryConfig& cfg);

/// Closes the graph under the configured rule set. Marks only ever refine
/// from Circle.
void apply_orientation_rules(Pag& g, const SepsetTable& sepsets, RuleSet rules);

/// Skeleton → colliders → optional possible-d-sep refinement → rules.
DiscoveryResult learn_pag(IndependenceTest& ci, std::vector<ItemId> labels, const DiscoveryConfig& cfg,
                          const Pag::MarkObserver& observer = {});

namespace rules {
// Individual rules, exposed for testing. Each returns true if it changed a mark.
bool r1(Pag& g);
bool r2(Pag& g);
bool r3(Pag& g);
bool r4(Pag& g, const SepsetTable& sepsets);
bool r8(Pag& g);
bool r9(Pag& g);
bool r10(Pag& g);
}  // namespace rules

}  // namespace attncause
