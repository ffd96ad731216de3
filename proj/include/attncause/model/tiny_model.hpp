#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "attncause/model/recommender.hpp"

namespace attncause {

/// Which attention head(s) form the reported matrix.
struct HeadSelection {
    std::optional<int> index;  ///< nullopt: arithmetic mean over heads

    /// "mean" or a non-negative head index.
    static HeadSelection parse(const std::string& text);
};

/// Parameters of a single-layer self-attention recommender.
struct TinyWeights {
    std::vector<ItemId> vocab;
    int heads = 1;
    int head_dim = 0;
    Eigen::MatrixXd embeddings;  ///< |vocab| x dim
    Eigen::VectorXd mask;        ///< dim
    Eigen::MatrixXd positional;  ///< max_len x dim
    std::vector<Eigen::MatrixXd> wq, wk, wv;  ///< per head, dim x head_dim
    Eigen::MatrixXd wo;                       ///< heads*head_dim x dim

    [[nodiscard]] int dim() const { return static_cast<int>(embeddings.cols()); }
    [[nodiscard]] int max_len() const { return static_cast<int>(positional.rows()); }
    void validate() const;
};

TinyWeights load_tiny_weights(const std::filesystem::path& path);
void save_tiny_weights(const TinyWeights& w, const std::filesystem::path& path);
TinyWeights random_tiny_weights(std::uint64_t seed, std::vector<ItemId> vocab, int dim, int heads, int max_len);

struct TinyForward {
    Eigen::MatrixXd hidden;                    ///< tokens x dim, after attention + residual
    std::vector<Eigen::MatrixXd> attention;    ///< per head, tokens x tokens, row-softmax
};

/// Embedding + positional input, one multi-head self-attention layer with
/// softmax(QKᵀ/√d_h), output projection and residual. A trailing mask token
/// is appended when `append_mask` is set.
TinyForward tiny_forward(const TinyWeights& w, std::span<const ItemId> items, bool append_mask);

class TinyRecommender final : public Recommender {
public:
    explicit TinyRecommender(TinyWeights weights, HeadSelection heads = {});

    /// Scores every vocabulary item by its embedding's dot product with the
    /// hidden state at the masked position.
    Ranking recommend(std::span<const ItemId> session, std::size_t k) override;
    /// Attention of the forward pass over `tokens` without a mask token.
    Attention attention(std::span<const ItemId> tokens) override;

    [[nodiscard]] const TinyWeights& weights() const { return weights_; }

private:
    TinyWeights weights_;
    HeadSelection heads_;
    std::map<ItemId, int> row_of_;
};

}  // namespace attncause
