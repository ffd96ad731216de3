#include "attncause/discovery/fci.hpp"

namespace attncause {

namespace {

bool has_bidirected(const Pag& g) {
    for (const auto& [k, m] : g.edges())
        if (m.at_low == EdgeMark::Arrow && m.at_high == EdgeMark::Arrow) return true;
    return false;
}

}  // namespace

DiscoveryResult learn_pag(IndependenceTest& ci, std::vector<ItemId> labels, const DiscoveryConfig& cfg,
                          const Pag::MarkObserver& observer) {
    SkeletonResult skel = learn_skeleton(ci, std::move(labels), cfg);
    DiscoveryResult out;
    out.sepsets = std::move(skel.sepsets);

    bool run_pds = cfg.possible_dsep == PossibleDsep::Always;
    if (cfg.possible_dsep == PossibleDsep::Auto) {
        Pag probe = skel.graph;
        orient_colliders(probe, out.sepsets);
        run_pds = has_bidirected(probe);
    }
    if (run_pds) {
        // Possible-d-sep sets come from a collider-oriented scratch copy; the
        // output graph itself is oriented once, on the final skeleton, so
        // its marks never move backwards.
        Pag scratch = skel.graph;
        orient_colliders(scratch, out.sepsets);
        refine_with_possible_dsep(ci, skel.graph, scratch, out.sepsets, cfg);
        out.ran_possible_dsep = true;
    }

    out.pag = std::move(skel.graph);
    out.pag.reset_marks();
    if (observer) out.pag.set_observer(observer);
    orient_colliders(out.pag, out.sepsets);
    apply_orientation_rules(out.pag, out.sepsets, cfg.rule_set);
    out.pag.set_observer({});
    out.ci_tests = ci.tests_run();
    return out;
}

}  // namespace attncause
