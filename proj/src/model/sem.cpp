#include "attncause/model/sem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace attncause {

void SemSpec::validate() const {
    if (observed < 0 || latent < 0 || nodes() == 0) throw Error("SEM needs at least one node");
    if (static_cast<int>(noise_variances.size()) != nodes()) throw Error("one noise variance per node required");
    for (double v : noise_variances)
        if (!(v > 0.0) || !std::isfinite(v)) throw Error("noise variances must be positive and finite");
    for (const SemEdge& e : edges) {
        if (e.from < 0 || e.from >= nodes() || e.to < 0 || e.to >= nodes() || e.from == e.to) {
            throw Error("SEM edge endpoints out of range");
        }
        if (!std::isfinite(e.weight)) throw Error("SEM edge weight must be finite");
    }
    // Kahn's algorithm for acyclicity.
    std::vector<int> indegree(nodes(), 0);
    std::vector<std::vector<int>> children(nodes());
    for (const SemEdge& e : edges) {
        ++indegree[e.to];
        children[e.from].push_back(e.to);
    }
    std::vector<int> ready;
    for (int v = 0; v < nodes(); ++v)
        if (indegree[v] == 0) ready.push_back(v);
    int visited = 0;
    while (!ready.empty()) {
        const int v = ready.back();
        ready.pop_back();
        ++visited;
        for (int c : children[v])
            if (--indegree[c] == 0) ready.push_back(c);
    }
    if (visited != nodes()) throw Error("SEM graph has a directed cycle");
}

std::vector<std::vector<int>> SemSpec::parents() const {
    std::vector<std::vector<int>> out(nodes());
    for (const SemEdge& e : edges) out[e.to].push_back(e.from);
    for (auto& p : out) std::sort(p.begin(), p.end());
    return out;
}

Eigen::MatrixXd total_effects(const SemSpec& spec) {
    spec.validate();
    const int n = spec.nodes();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (const SemEdge& e : spec.edges) w(e.to, e.from) += e.weight;
    const Eigen::MatrixXd i_minus_w = Eigen::MatrixXd::Identity(n, n) - w;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(i_minus_w);
    if (!lu.isInvertible()) throw DegenerateError("I - W is singular");
    return lu.inverse();
}

Eigen::MatrixXd sem_covariance(const SemSpec& spec) {
    const Eigen::MatrixXd m = total_effects(spec);
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(spec.noise_variances.data(), spec.nodes());
    const Eigen::MatrixXd full = m * v.asDiagonal() * m.transpose();
    return full.topLeftCorner(spec.observed, spec.observed);
}

namespace {

double signed_weight(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> magnitude(lo, hi);
    std::bernoulli_distribution negative(0.5);
    const double w = magnitude(rng);
    return negative(rng) ? -w : w;
}

void add_latents(SemSpec& spec, std::mt19937_64& rng, int children, double lo, double hi) {
    for (int h = 0; h < spec.latent; ++h) {
        std::vector<int> pool(spec.observed);
        std::iota(pool.begin(), pool.end(), 0);
        std::shuffle(pool.begin(), pool.end(), rng);
        const int count = std::min<int>(children, spec.observed);
        for (int c = 0; c < count; ++c) spec.edges.push_back({spec.observed + h, pool[c], signed_weight(rng, lo, hi)});
    }
}

}  // namespace

SemSpec random_sem(std::uint64_t seed, int observed, int latent, const RandomSemOptions& opts) {
    std::mt19937_64 rng(seed);
    SemSpec spec;
    spec.observed = observed;
    spec.latent = latent;
    spec.seed = seed;

    std::vector<int> order(observed);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::bernoulli_distribution edge(opts.edge_probability);
    for (int a = 0; a < observed; ++a)
        for (int b = a + 1; b < observed; ++b)
            if (edge(rng)) spec.edges.push_back({order[a], order[b], signed_weight(rng, opts.min_abs_weight, opts.max_abs_weight)});
    add_latents(spec, rng, opts.latent_children, opts.min_abs_weight, opts.max_abs_weight);

    std::uniform_real_distribution<double> variance(opts.min_variance, opts.max_variance);
    for (int v = 0; v < spec.nodes(); ++v) spec.noise_variances.push_back(variance(rng));
    spec.validate();
    return spec;
}

SemRecommender::SemRecommender(SemSpec spec, std::map<ItemId, double> values)
    : spec_(std::move(spec)), sigma_(sem_covariance(spec_)), values_(std::move(values)) {
    for (const auto& [id, v] : values_) require_item(id);
}

int SemRecommender::require_item(ItemId id) const {
    if (id < 0 || id >= spec_.observed) throw UnknownNodeError("item " + std::to_string(id) + " is not in the SEM vocabulary");
    return static_cast<int>(id);
}

Ranking SemRecommender::recommend(std::span<const ItemId> session, std::size_t k) {
    const auto s = static_cast<Eigen::Index>(session.size());
    std::vector<char> in_session(spec_.observed, 0);
    Eigen::VectorXd x(s);
    Eigen::MatrixXd sigma_ss(s, s);
    for (Eigen::Index a = 0; a < s; ++a) {
        const int ia = require_item(session[a]);
        auto it = values_.find(session[a]);
        if (it == values_.end()) throw UnavailableError("no realised value for item " + std::to_string(session[a]));
        x(a) = it->second;
        in_session[ia] = 1;
        for (Eigen::Index b = 0; b < s; ++b) sigma_ss(a, b) = sigma_(ia, require_item(session[b]));
    }
    // Conditional means E[X_c | X_S = x] = Σ_cS Σ_SS⁻¹ x.
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(s);
    if (s > 0) weights = sigma_ss.ldlt().solve(x);

    Ranking ranking;
    for (int c = 0; c < spec_.observed; ++c) {
        if (in_session[c]) continue;
        double mean = 0.0;
        for (Eigen::Index a = 0; a < s; ++a) mean += sigma_(c, static_cast<int>(session[a])) * weights(a);
        ranking.push_back({c, mean});
    }
    std::sort(ranking.begin(), ranking.end(), [](const ScoredItem& a, const ScoredItem& b) {
        return a.score != b.score ? a.score > b.score : a.item < b.item;
    });
    if (ranking.size() > k) ranking.resize(k);
    return ranking;
}

Attention SemRecommender::attention(std::span<const ItemId> tokens) {
    const auto n = static_cast<Eigen::Index>(tokens.size());
    Eigen::MatrixXd sub(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = sigma_(require_item(tokens[a]), require_item(tokens[b]));
    return attention_from_covariance(sub);
}

SyntheticWorld make_world(std::uint64_t seed, int index, const WorldOptions& opts) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<int> session_len(opts.min_session, opts.max_session);
    std::uniform_int_distribution<int> latent_count(0, opts.max_latent);

    const int n = session_len(rng);
    SemSpec spec;
    spec.observed = n + opts.candidates;
    spec.latent = latent_count(rng);
    spec.seed = seed;

    std::bernoulli_distribution session_edge(opts.session_edge_probability);
    std::bernoulli_distribution candidate_edge(opts.candidate_edge_probability);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (session_edge(rng)) spec.edges.push_back({a, b, signed_weight(rng, opts.min_abs_weight, opts.max_abs_weight)});
    for (int a = 0; a < n; ++a)
        for (int c = n; c < spec.observed; ++c)
            if (candidate_edge(rng)) spec.edges.push_back({a, c, signed_weight(rng, opts.min_abs_weight, opts.max_abs_weight)});
    add_latents(spec, rng, 2, opts.min_abs_weight, opts.max_abs_weight);

    std::uniform_real_distribution<double> variance(0.5, 1.0);
    for (int v = 0; v < spec.nodes(); ++v) spec.noise_variances.push_back(variance(rng));
    spec.validate();

    // One joint draw X = M·e; the session keeps its own coordinates.
    const Eigen::MatrixXd m = total_effects(spec);
    Eigen::VectorXd e(spec.nodes());
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int v = 0; v < spec.nodes(); ++v) e(v) = std::sqrt(spec.noise_variances[v]) * normal(rng);
    const Eigen::VectorXd x = m * e;

    SyntheticWorld world;
    world.id = "s" + std::to_string(index);
    world.sem = std::move(spec);
    for (int a = 0; a < n; ++a) {
        world.session.items.push_back(a);
        world.values[a] = x(a);
    }
    return world;
}

std::vector<SyntheticWorld> make_benchmark(std::uint64_t seed, int count, const WorldOptions& opts) {
    std::vector<SyntheticWorld> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(make_world(seed, i, opts));
    return out;
}

}  // namespace attncause
