#include <doctest.h>

#include <random>

#include "attncause/graph/pag.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracle.hpp"

using namespace attncause;
using fixture::I1;
using fixture::I2;
using fixture::I3;
using fixture::I4;
using fixture::Rec;

TEST_CASE("adjacency queries") {
    const Pag empty({1, 2, 3});
    CHECK_FALSE(empty.adjacent(0, 1));
    CHECK_FALSE(empty.adjacent(1, 2));

    const Pag g = fixture::recommendation_graph();
    CHECK(g.adjacent(I2, Rec));
    CHECK(g.adjacent(Rec, I2));
    CHECK_FALSE(g.adjacent(I1, Rec));
    CHECK_THROWS_AS((void)g.adjacent(0, 9), UnknownNodeError);
}

TEST_CASE("mark lookup is per endpoint and order independent") {
    const Pag g = fixture::recommendation_graph();
    CHECK(g.mark_at(I2, Rec) == EdgeMark::Arrow);
    CHECK(g.mark_at(Rec, I2) == EdgeMark::Tail);
    CHECK(g.mark_at(I3, I1) == EdgeMark::Circle);
    CHECK(g.mark_at(I1, I3) == EdgeMark::Arrow);
    CHECK_THROWS_AS((void)g.mark_at(I1, Rec), Error);

    const Pag complete = Pag::complete({7, 8});
    CHECK(complete.mark_at(0, 1) == EdgeMark::Circle);
    CHECK(complete.mark_at(1, 0) == EdgeMark::Circle);
}

TEST_CASE("unshielded colliders") {
    // I5 *-> I3 <-* I1 with I5 and I1 not adjacent.
    Pag g({1, 3, 5});
    g.add_edge(0, 1, EdgeMark::Circle, EdgeMark::Arrow);
    g.add_edge(2, 1, EdgeMark::Tail, EdgeMark::Arrow);
    CHECK(g.is_unshielded_collider(2, 1, 0));
    CHECK(g.is_unshielded_collider(0, 1, 2));

    Pag chain({1, 2, 3});
    chain.add_edge(0, 1, EdgeMark::Tail, EdgeMark::Arrow);
    chain.add_edge(1, 2, EdgeMark::Tail, EdgeMark::Arrow);
    CHECK_FALSE(chain.is_unshielded_collider(0, 1, 2));

    Pag triangle({1, 2, 3});
    triangle.add_edge(0, 1, EdgeMark::Tail, EdgeMark::Arrow);
    triangle.add_edge(2, 1, EdgeMark::Tail, EdgeMark::Arrow);
    triangle.add_edge(0, 2);
    CHECK_FALSE(triangle.is_unshielded_collider(0, 1, 2));
}

TEST_CASE("collider check is symmetric in its outer nodes") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Pag g = oracle::random_pag(rng, 6, 0.5);
        for (int u = 0; u < 6; ++u)
            for (int v = 0; v < 6; ++v)
                for (int w = 0; w < 6; ++w) {
                    if (u == v || v == w || u == w) continue;
                    REQUIRE(g.is_unshielded_collider(u, v, w) == g.is_unshielded_collider(w, v, u));
                }
    }
}

TEST_CASE("set_mark refines circles and rejects contradictions") {
    Pag g({1, 2});
    g.add_edge(0, 1);
    g.set_mark(0, 1, EdgeMark::Arrow);
    CHECK(g.mark_at(0, 1) == EdgeMark::Arrow);
    g.set_mark(0, 1, EdgeMark::Arrow);
    CHECK(g.mark_at(0, 1) == EdgeMark::Arrow);
    CHECK_THROWS_AS(g.set_mark(0, 1, EdgeMark::Tail), MarkConflictError);
    CHECK(g.mark_at(0, 1) == EdgeMark::Arrow);
    CHECK(g.mark_at(1, 0) == EdgeMark::Circle);
}

TEST_CASE("edges are unique and never loops") {
    Pag g({1, 2, 3});
    g.add_edge(0, 1);
    CHECK_THROWS_AS(g.add_edge(1, 0), Error);
    CHECK_THROWS_AS(g.add_edge(2, 2), Error);
    CHECK(g.edge_count() == 1);
    g.remove_edge(0, 1);
    CHECK(g.edge_count() == 0);
    CHECK_THROWS_AS(Pag({1, 1}), Error);
}

TEST_CASE("observer sees each mark change") {
    Pag g({1, 2});
    g.add_edge(0, 1);
    int changes = 0;
    g.set_observer([&](NodeIndex x, NodeIndex y, EdgeMark before, EdgeMark after) {
        CHECK(x == 0);
        CHECK(y == 1);
        CHECK(before == EdgeMark::Circle);
        CHECK(after == EdgeMark::Tail);
        ++changes;
    });
    g.set_mark(0, 1, EdgeMark::Tail);
    g.set_mark(0, 1, EdgeMark::Tail);
    CHECK(changes == 1);
}

TEST_CASE("text format") {
    const Pag g = fixture::recommendation_graph();
    CHECK(to_text(g) == "nodes 1 2 3 4 5\n1 o-> 3\n2 o-o 4\n2 --> 5\n3 <-> 5\n");
    CHECK(parse_pag(to_text(g)) == g);
    CHECK_THROWS_AS(parse_pag("nodes 1 2\n1 x-> 2\n"), FormatError);
    CHECK_THROWS_AS(parse_pag("1 o-> 2\n"), FormatError);
    CHECK_THROWS_AS(parse_pag("nodes 1 2\n1 o-> 9\n"), FormatError);
}

TEST_CASE("text round trip on random graphs") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const Pag g = oracle::random_pag(rng, 1 + trial % 9, 0.4);
        REQUIRE(parse_pag(to_text(g)) == g);
    }
}

TEST_CASE("dot export carries the marks") {
    const std::string dot = to_dot(fixture::recommendation_graph());
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("<->") != std::string::npos);
    CHECK(dot.find("o->") != std::string::npos);
}

TEST_CASE("sepset table") {
    SepsetTable t;
    t.record(3, 1, {2, 0});
    CHECK(t.has(1, 3));
    CHECK(t.get(3, 1) == std::vector<NodeIndex>{0, 2});
    CHECK(t.separates_with(1, 3, 2));
    CHECK_FALSE(t.separates_with(1, 3, 4));
    CHECK_THROWS_AS(t.record(1, 2, {1}), Error);
    t.erase(1, 3);
    CHECK_FALSE(t.has(1, 3));
}
