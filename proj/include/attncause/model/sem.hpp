#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "attncause/ci/correlation.hpp"
#include "attncause/model/recommender.hpp"

namespace attncause {

struct SemEdge {
    int from = 0;
    int to = 0;
    double weight = 0.0;

    friend bool operator==(const SemEdge&, const SemEdge&) = default;
};

/// Linear-Gaussian structural model X = W·X + e. Nodes 0..observed-1 are
/// observed, observed..observed+latent-1 latent.
struct SemSpec {
    int observed = 0;
    int latent = 0;
    std::vector<SemEdge> edges;
    std::vector<double> noise_variances;
    std::uint64_t seed = 0;

    [[nodiscard]] int nodes() const { return observed + latent; }
    /// Throws unless acyclic with finite weights and positive variances.
    void validate() const;
    /// Parents of each node.
    [[nodiscard]] std::vector<std::vector<int>> parents() const;

    friend bool operator==(const SemSpec&, const SemSpec&) = default;
};

/// (I − W)⁻¹ over all nodes; entry (i, j) is the total effect of j on i.
Eigen::MatrixXd total_effects(const SemSpec& spec);

/// Covariance of the observed variables, M·diag(v)·Mᵀ restricted.
Eigen::MatrixXd sem_covariance(const SemSpec& spec);

/// Lower-triangular A with A·Aᵀ = Σ. The result stands in for an attention
/// matrix whose correlation reproduces corr(Σ) exactly.
template <typename Derived>
AttentionMatrix<typename Derived::Scalar> attention_from_covariance(const Eigen::MatrixBase<Derived>& sigma) {
    using Scalar = typename Derived::Scalar;
    if (sigma.rows() != sigma.cols()) throw DegenerateError("covariance must be square");
    Eigen::LLT<DenseMatrix<Scalar>> llt(sigma);
    if (llt.info() != Eigen::Success) throw DegenerateError("covariance is not positive definite");
    AttentionMatrix<Scalar> out;
    out.values = llt.matrixL();
    out.synthetic_factor = true;
    return out;
}

struct RandomSemOptions {
    double edge_probability = 0.35;
    double min_abs_weight = 0.5;
    double max_abs_weight = 1.5;
    double min_variance = 0.5;
    double max_variance = 1.5;
    /// Each latent gets exactly this many observed children.
    int latent_children = 2;
};

/// Random DAG over observed nodes in a shuffled causal order, plus latent
/// confounders each pointing at distinct observed nodes.
SemSpec random_sem(std::uint64_t seed, int observed, int latent, const RandomSemOptions& opts = {});

/// Recommender backed by an SEM: item ids are observed node indices, and
/// each session item carries a realised value. The recommendation is the
/// non-session item with the largest conditional mean given the session.
class SemRecommender final : public Recommender {
public:
    SemRecommender(SemSpec spec, std::map<ItemId, double> values);

    Ranking recommend(std::span<const ItemId> session, std::size_t k) override;
    /// Cholesky factor of the token covariance (flagged synthetic).
    Attention attention(std::span<const ItemId> tokens) override;

    [[nodiscard]] const SemSpec& spec() const { return spec_; }
    [[nodiscard]] const Eigen::MatrixXd& covariance() const { return sigma_; }
    [[nodiscard]] const std::map<ItemId, double>& values() const { return values_; }

private:
    int require_item(ItemId id) const;

    SemSpec spec_;
    Eigen::MatrixXd sigma_;
    std::map<ItemId, double> values_;
};

/// One synthetic benchmark case: an SEM world and a session of realised
/// interactions drawn from it.
struct SyntheticWorld {
    std::string id;
    SemSpec sem;
    Session session;
    std::map<ItemId, double> values;
};

struct WorldOptions {
    int min_session = 5;
    int max_session = 8;
    int candidates = 8;
    int max_latent = 2;
    double session_edge_probability = 0.35;
    double candidate_edge_probability = 0.3;
    double min_abs_weight = 0.5;
    double max_abs_weight = 1.2;
};

/// Session items occupy nodes 0..n-1 in causal (= temporal) order,
/// candidate items follow, latents come last.
SyntheticWorld make_world(std::uint64_t seed, int index, const WorldOptions& opts = {});
std::vector<SyntheticWorld> make_benchmark(std::uint64_t seed, int count, const WorldOptions& opts = {});

}  // namespace attncause
