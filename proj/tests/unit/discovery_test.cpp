#include <doctest.h>

#include <random>

#include "attncause/discovery/fci.hpp"
#include "attncause/explain/explain.hpp"
#include "attncause/model/sem.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracle.hpp"

using namespace attncause;

namespace {

std::vector<ItemId> labels(int n) {
    std::vector<ItemId> out(n);
    std::iota(out.begin(), out.end(), 0);
    return out;
}

DiscoveryResult learn_oracle(const oracle::Dag& d, int observed, DiscoveryConfig cfg = {},
                             const Pag::MarkObserver& obs = {}) {
    oracle::DsepTest ci(d, observed);
    return learn_pag(ci, labels(observed), cfg, obs);
}

// Presents a test under permuted indices: variable i here is perm[i] there.
class PermutedTest final : public IndependenceTest {
public:
    PermutedTest(IndependenceTest& inner, std::vector<int> perm) : inner_(inner), perm_(std::move(perm)) {}
    CiDecision test(int i, int j, std::span<const int> z) override {
        std::vector<int> mapped;
        for (int v : z) mapped.push_back(perm_[v]);
        std::sort(mapped.begin(), mapped.end());
        return inner_.test(perm_[i], perm_[j], mapped);
    }
    [[nodiscard]] int variables() const override { return inner_.variables(); }

private:
    IndependenceTest& inner_;
    std::vector<int> perm_;
};

void check_against_truth(const Pag& g, const oracle::MagTruth& truth) {
    for (int x = 0; x < truth.observed; ++x)
        for (int y = x + 1; y < truth.observed; ++y) {
            REQUIRE(g.adjacent(x, y) == static_cast<bool>(truth.adjacent[x][y]));
            if (!g.adjacent(x, y)) continue;
            for (auto [a, b] : {std::pair{x, y}, std::pair{y, x}}) {
                const EdgeMark m = g.mark_at(a, b);
                if (m != EdgeMark::Circle) REQUIRE(m == truth.mark_at(a, b));
            }
        }
}

}  // namespace

TEST_CASE("chain: skeleton and separating set") {
    oracle::Dag d(3);
    d.add(0, 1);
    d.add(1, 2);
    oracle::DsepTest ci(d, 3);
    const SkeletonResult s = learn_skeleton(ci, labels(3), {});
    CHECK(s.graph.adjacent(0, 1));
    CHECK(s.graph.adjacent(1, 2));
    CHECK_FALSE(s.graph.adjacent(0, 2));
    CHECK(s.sepsets.get(0, 2) == std::vector<NodeIndex>{1});
    CHECK(s.sepsets.size() == 1);

    Pag g = s.graph;
    orient_colliders(g, s.sepsets);
    CHECK(g == s.graph);
    CHECK(to_text(learn_oracle(d, 3).pag) == "nodes 0 1 2\n0 o-o 1\n1 o-o 2\n");
}

TEST_CASE("collider: empty separating set and arrowheads") {
    oracle::Dag d(3);
    d.add(0, 2);
    d.add(1, 2);
    oracle::DsepTest ci(d, 3);
    const SkeletonResult s = learn_skeleton(ci, labels(3), {});
    CHECK_FALSE(s.graph.adjacent(0, 1));
    CHECK(s.sepsets.get(0, 1).empty());
    Pag g = s.graph;
    orient_colliders(g, s.sepsets);
    CHECK(to_text(g) == "nodes 0 1 2\n0 o-> 2\n1 o-> 2\n");
}

TEST_CASE("independent variables give an empty graph") {
    const oracle::Dag d(4);
    CHECK(learn_oracle(d, 4).pag.edge_count() == 0);
    CHECK(learn_oracle(oracle::Dag(2), 2).pag.edge_count() == 0);
    Pag empty(labels(3));
    orient_colliders(empty, {});
    CHECK(empty.edge_count() == 0);
}

TEST_CASE("latent confounder alone leaves circles") {
    oracle::Dag d(3);
    d.add(2, 0);
    d.add(2, 1);
    CHECK(to_text(learn_oracle(d, 2).pag) == "nodes 0 1\n0 o-o 1\n");
}

TEST_CASE("R1 away from a collider") {
    Pag g(labels(3));
    g.add_edge(0, 1, EdgeMark::Circle, EdgeMark::Arrow);
    g.add_edge(1, 2);
    CHECK(rules::r1(g));
    CHECK(g.mark_at(1, 2) == EdgeMark::Arrow);
    CHECK(g.mark_at(2, 1) == EdgeMark::Tail);
    CHECK_FALSE(rules::r1(g));

    const Pag closed = g;
    apply_orientation_rules(g, {}, RuleSet::Extended);
    CHECK(g == closed);
}

TEST_CASE("R2 follows directed paths") {
    Pag g(labels(3));
    g.add_edge(0, 1, EdgeMark::Tail, EdgeMark::Arrow);
    g.add_edge(1, 2, EdgeMark::Circle, EdgeMark::Arrow);
    g.add_edge(0, 2);
    CHECK(rules::r2(g));
    CHECK(g.mark_at(0, 2) == EdgeMark::Arrow);
    CHECK(g.mark_at(2, 0) == EdgeMark::Circle);
}

TEST_CASE("R3 double triangle") {
    // 0 *-> 1 <-* 2, 0 *-o 3 o-* 2, 3 *-o 1.
    Pag g(labels(4));
    g.add_edge(0, 1, EdgeMark::Circle, EdgeMark::Arrow);
    g.add_edge(2, 1, EdgeMark::Circle, EdgeMark::Arrow);
    g.add_edge(0, 3);
    g.add_edge(2, 3);
    g.add_edge(3, 1);
    CHECK(rules::r3(g));
    CHECK(g.mark_at(3, 1) == EdgeMark::Arrow);
}

TEST_CASE("R4 discriminating path") {
    // theta=0 -> alpha=1 <-* beta=2 o-o gamma=3, alpha -> gamma.
    auto build = [] {
        Pag g(labels(4));
        g.add_edge(0, 1, EdgeMark::Tail, EdgeMark::Arrow);
        g.add_edge(1, 2, EdgeMark::Arrow, EdgeMark::Arrow);
        g.add_edge(1, 3, EdgeMark::Tail, EdgeMark::Arrow);
        g.add_edge(2, 3);
        return g;
    };
    SUBCASE("beta in the separating set") {
        Pag g = build();
        SepsetTable s;
        s.record(0, 3, {1, 2});
        s.record(0, 2, {1});
        CHECK(rules::r4(g, s));
        CHECK(g.mark_at(2, 3) == EdgeMark::Arrow);
        CHECK(g.mark_at(3, 2) == EdgeMark::Tail);
    }
    SUBCASE("beta outside the separating set") {
        Pag g = build();
        SepsetTable s;
        s.record(0, 3, {1});
        s.record(0, 2, {});
        CHECK(rules::r4(g, s));
        CHECK(g.mark_at(2, 3) == EdgeMark::Arrow);
        CHECK(g.mark_at(3, 2) == EdgeMark::Arrow);
        CHECK(g.mark_at(1, 2) == EdgeMark::Arrow);
    }
}

TEST_CASE("R8 tail from a directed pair") {
    Pag g(labels(3));
    g.add_edge(0, 1, EdgeMark::Tail, EdgeMark::Arrow);
    g.add_edge(1, 2, EdgeMark::Tail, EdgeMark::Arrow);
    g.add_edge(0, 2, EdgeMark::Circle, EdgeMark::Arrow);
    CHECK(rules::r8(g));
    CHECK(g.mark_at(2, 0) == EdgeMark::Tail);
}

TEST_CASE("R9 uncovered potentially directed path") {
    // 0 o-> 3 with 0 o-> 1 o-> 2 o-> 3 uncovered.
    Pag g(labels(4));
    g.add_edge(0, 3, EdgeMark::Circle, EdgeMark::Arrow);
    g.add_edge(0, 1, EdgeMark::Circle, EdgeMark::Arrow);
    g.add_edge(1, 2, EdgeMark::Circle, EdgeMark::Arrow);
    g.add_edge(2, 3, EdgeMark::Circle, EdgeMark::Arrow);
    CHECK(rules::r9(g));
    CHECK(g.mark_at(3, 0) == EdgeMark::Tail);
}

TEST_CASE("R10 two directed parents") {
    // 0 o-> 3, 1 -> 3 <- 2, 0 o-> 1, 0 o-> 2, 1 and 2 non-adjacent.
    Pag g(labels(4));
    g.add_edge(0, 3, EdgeMark::Circle, EdgeMark::Arrow);
    g.add_edge(1, 3, EdgeMark::Tail, EdgeMark::Arrow);
    g.add_edge(2, 3, EdgeMark::Tail, EdgeMark::Arrow);
    g.add_edge(0, 1, EdgeMark::Circle, EdgeMark::Arrow);
    g.add_edge(0, 2, EdgeMark::Circle, EdgeMark::Arrow);
    CHECK(rules::r10(g));
    CHECK(g.mark_at(3, 0) == EdgeMark::Tail);
}

TEST_CASE("config validation") {
    DiscoveryConfig cfg;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.alpha = 0.05;
    cfg.max_cond_size = -1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.max_cond_size = 0;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("conditioning cap limits separation") {
    oracle::Dag d(3);
    d.add(0, 1);
    d.add(1, 2);
    DiscoveryConfig cfg;
    cfg.max_cond_size = 0;
    CHECK(learn_oracle(d, 3, cfg).pag.adjacent(0, 2));
}

TEST_CASE("recommendation-shaped model through analytic covariance") {
    const SemSpec spec = fixture::recommendation_sem();
    const DiscoveryResult r = discover_from_attention(attention_from_covariance(sem_covariance(spec)),
                                                      {1, 2, 3, 4, 5}, {});
    CHECK(to_text(r.pag) == "nodes 1 2 3 4 5\n1 o-> 3\n2 o-o 4\n2 o-> 5\n3 <-> 5\n");

    const PiTree tree = build_pi_tree(r.pag, fixture::Rec);
    CHECK(tree.depth(fixture::I2) == 1);
    CHECK(tree.depth(fixture::I3) == 1);
    CHECK(tree.depth(fixture::I1) == 2);
    CHECK(tree.parent(fixture::I1) == fixture::I3);
    CHECK_FALSE(tree.contains(fixture::I4));
}

TEST_CASE("oracle learner recovers the MAG skeleton and its settled marks") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 120; ++trial) {
        const int observed = 3 + trial % 6;
        const int latent = trial % 3;
        const oracle::Dag d = oracle::random_dag(rng, observed, latent, 0.35);
        const oracle::MagTruth truth(d, observed);
        for (RuleSet rs : {RuleSet::Core, RuleSet::Extended}) {
            DiscoveryConfig cfg;
            cfg.rule_set = rs;
            const DiscoveryResult r = learn_oracle(d, observed, cfg);
            check_against_truth(r.pag, truth);
            // Arrowhead pairs on unshielded triples are true colliders.
            for (int v = 0; v < observed; ++v)
                for (int u = 0; u < observed; ++u)
                    for (int w = u + 1; w < observed; ++w) {
                        if (u == v || w == v) continue;
                        if (!r.pag.adjacent(u, v) || !r.pag.adjacent(w, v)) continue;
                        if (r.pag.is_unshielded_collider(u, v, w)) {
                            REQUIRE_FALSE(truth.ancestor[v][u]);
                            REQUIRE_FALSE(truth.ancestor[v][w]);
                        }
                    }
        }
    }
}

TEST_CASE("marks only ever refine from circle") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 80; ++trial) {
        const int observed = 4 + trial % 5;
        const oracle::Dag d = oracle::random_dag(rng, observed, trial % 3, 0.4);
        int violations = 0;
        DiscoveryConfig cfg;
        cfg.rule_set = RuleSet::Extended;
        cfg.possible_dsep = PossibleDsep::Always;
        (void)learn_oracle(d, observed, cfg, [&](NodeIndex, NodeIndex, EdgeMark before, EdgeMark) {
            if (before != EdgeMark::Circle) ++violations;
        });
        REQUIRE(violations == 0);
    }
}

TEST_CASE("relabelling the input relabels the output") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 60; ++trial) {
        const int observed = 4 + trial % 5;
        const oracle::Dag d = oracle::random_dag(rng, observed, trial % 3, 0.4);
        oracle::DsepTest base(d, observed);
        const Pag original = learn_pag(base, labels(observed), {}).pag;

        std::vector<int> perm(observed);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        PermutedTest permuted(base, perm);
        const Pag relabelled = learn_pag(permuted, labels(observed), {}).pag;

        for (int x = 0; x < observed; ++x)
            for (int y = x + 1; y < observed; ++y) {
                REQUIRE(relabelled.adjacent(x, y) == original.adjacent(perm[x], perm[y]));
                if (!relabelled.adjacent(x, y)) continue;
                REQUIRE(relabelled.mark_at(x, y) == original.mark_at(perm[x], perm[y]));
                REQUIRE(relabelled.mark_at(y, x) == original.mark_at(perm[y], perm[x]));
            }
    }
}

TEST_CASE("partial-correlation learner agrees with the oracle learner on SEMs") {
    for (int trial = 0; trial < 20; ++trial) {
        const SemSpec spec = random_sem(500 + trial, 5 + trial % 4, trial % 3);
        PartialCorrelationTest ci(correlation_from_attention(attention_from_covariance(sem_covariance(spec))), 0.01);
        const Pag learned = learn_pag(ci, labels(spec.observed), {}).pag;
        const Pag reference = learn_oracle(oracle::Dag::from_sem(spec), spec.observed).pag;
        REQUIRE(to_text(learned) == to_text(reference));
    }
}
