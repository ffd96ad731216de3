#pragma once

#include "attncause/graph/pag.hpp"
#include "attncause/model/sem.hpp"

namespace fixture {

// Session I1..I4 at indices 0..3, the recommendation at index 4.
inline constexpr attncause::NodeIndex I1 = 0, I2 = 1, I3 = 2, I4 = 3, Rec = 4;

// Hand-drawn learned graph: I1 o-> I3 <-> Rec <-- I2 o-o I4 (tail at I2).
inline attncause::Pag recommendation_graph() {
    using attncause::EdgeMark;
    attncause::Pag g({1, 2, 3, 4, 5});
    g.add_edge(I1, I3, EdgeMark::Circle, EdgeMark::Arrow);
    g.add_edge(I3, Rec, EdgeMark::Arrow, EdgeMark::Arrow);
    g.add_edge(I2, Rec, EdgeMark::Tail, EdgeMark::Arrow);
    g.add_edge(I2, I4, EdgeMark::Circle, EdgeMark::Circle);
    return g;
}

// Generating model for the same shape: I1 -> I3 <- H -> Rec <- I2 <- I4,
// H latent (node 5).
inline attncause::SemSpec recommendation_sem() {
    attncause::SemSpec s;
    s.observed = 5;
    s.latent = 1;
    s.edges = {{I1, I3, 0.8}, {5, I3, 0.9}, {5, Rec, 0.7}, {I2, Rec, 0.8}, {I4, I2, 0.9}};
    s.noise_variances = {1, 1, 1, 1, 1, 1};
    return s;
}

}  // namespace fixture
