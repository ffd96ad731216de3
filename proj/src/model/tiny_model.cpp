#include "attncause/model/tiny_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace attncause {

using nlohmann::json;

HeadSelection HeadSelection::parse(const std::string& text) {
    if (text == "mean") return {};
    try {
        std::size_t used = 0;
        const int idx = std::stoi(text, &used);
        if (used == text.size() && idx >= 0) return {idx};
    } catch (const std::exception&) {
    }
    throw Error("head selection must be 'mean' or a head index, got '" + text + "'");
}

void TinyWeights::validate() const {
    const auto v = static_cast<Eigen::Index>(vocab.size());
    if (v == 0 || embeddings.rows() != v) throw FormatError("embedding rows must match the vocabulary");
    if (heads < 1 || head_dim < 1) throw FormatError("heads and head_dim must be positive");
    if (mask.size() != dim() || positional.cols() != dim()) throw FormatError("mask/positional width mismatch");
    if (static_cast<int>(wq.size()) != heads || wk.size() != wq.size() || wv.size() != wq.size()) {
        throw FormatError("one projection per head required");
    }
    for (int h = 0; h < heads; ++h) {
        for (const auto* m : {&wq[h], &wk[h], &wv[h]}) {
            if (m->rows() != dim() || m->cols() != head_dim) throw FormatError("projection shape mismatch");
        }
    }
    if (wo.rows() != heads * head_dim || wo.cols() != dim()) throw FormatError("output projection shape mismatch");
}

namespace {

Eigen::MatrixXd matrix_from(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j.at(r).size()) != cols) throw FormatError("ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

json matrix_to(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

Eigen::MatrixXd gaussian(std::mt19937_64& rng, int rows, int cols, double sd) {
    std::normal_distribution<double> normal(0.0, sd);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = normal(rng);
    return m;
}

}  // namespace

TinyWeights load_tiny_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open weights file " + path.string());
    TinyWeights w;
    try {
        const json j = json::parse(in);
        w.vocab = j.at("vocab").get<std::vector<ItemId>>();
        w.heads = j.at("heads").get<int>();
        w.head_dim = j.at("head_dim").get<int>();
        w.embeddings = matrix_from(j.at("embeddings"));
        const auto mask = j.at("mask").get<std::vector<double>>();
        w.mask = Eigen::Map<const Eigen::VectorXd>(mask.data(), static_cast<Eigen::Index>(mask.size()));
        w.positional = matrix_from(j.at("positional"));
        for (const auto& m : j.at("wq")) w.wq.push_back(matrix_from(m));
        for (const auto& m : j.at("wk")) w.wk.push_back(matrix_from(m));
        for (const auto& m : j.at("wv")) w.wv.push_back(matrix_from(m));
        w.wo = matrix_from(j.at("wo"));
    } catch (const json::exception& e) {
        throw FormatError("malformed weights file " + path.string() + ": " + e.what());
    }
    w.validate();
    return w;
}

void save_tiny_weights(const TinyWeights& w, const std::filesystem::path& path) {
    w.validate();
    json j;
    j["vocab"] = w.vocab;
    j["heads"] = w.heads;
    j["head_dim"] = w.head_dim;
    j["embeddings"] = matrix_to(w.embeddings);
    j["mask"] = std::vector<double>(w.mask.data(), w.mask.data() + w.mask.size());
    j["positional"] = matrix_to(w.positional);
    for (const char* name : {"wq", "wk", "wv"}) j[name] = json::array();
    for (int h = 0; h < w.heads; ++h) {
        j["wq"].push_back(matrix_to(w.wq[h]));
        j["wk"].push_back(matrix_to(w.wk[h]));
        j["wv"].push_back(matrix_to(w.wv[h]));
    }
    j["wo"] = matrix_to(w.wo);
    std::ofstream out(path);
    if (!out) throw Error("cannot write weights file " + path.string());
    out << j.dump() << '\n';
}

TinyWeights random_tiny_weights(std::uint64_t seed, std::vector<ItemId> vocab, int dim, int heads, int max_len) {
    std::mt19937_64 rng(seed);
    TinyWeights w;
    w.vocab = std::move(vocab);
    w.heads = heads;
    w.head_dim = std::max(1, dim / heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    w.embeddings = gaussian(rng, static_cast<int>(w.vocab.size()), dim, 1.0);
    w.mask = gaussian(rng, dim, 1, 1.0).col(0);
    w.positional = gaussian(rng, max_len, dim, 0.1);
    for (int h = 0; h < heads; ++h) {
        w.wq.push_back(gaussian(rng, dim, w.head_dim, scale));
        w.wk.push_back(gaussian(rng, dim, w.head_dim, scale));
        w.wv.push_back(gaussian(rng, dim, w.head_dim, scale));
    }
    w.wo = gaussian(rng, heads * w.head_dim, dim, scale);
    w.validate();
    return w;
}

TinyForward tiny_forward(const TinyWeights& w, std::span<const ItemId> items, bool append_mask) {
    const int n = static_cast<int>(items.size()) + (append_mask ? 1 : 0);
    if (n > w.max_len()) throw Error("sequence of " + std::to_string(n) + " tokens exceeds the positional table");
    Eigen::MatrixXd x(n, w.dim());
    for (int t = 0; t < static_cast<int>(items.size()); ++t) {
        auto it = std::find(w.vocab.begin(), w.vocab.end(), items[t]);
        if (it == w.vocab.end()) throw UnknownNodeError("item " + std::to_string(items[t]) + " is out of vocabulary");
        x.row(t) = w.embeddings.row(it - w.vocab.begin());
    }
    if (append_mask) x.row(n - 1) = w.mask.transpose();
    x += w.positional.topRows(n);

    TinyForward out;
    Eigen::MatrixXd concat(n, w.heads * w.head_dim);
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(w.head_dim));
    for (int h = 0; h < w.heads; ++h) {
        const Eigen::MatrixXd q = x * w.wq[h];
        const Eigen::MatrixXd k = x * w.wk[h];
        const Eigen::MatrixXd v = x * w.wv[h];
        Eigen::MatrixXd logits = (q * k.transpose()) * inv_sqrt;
        // Row-wise softmax, max-shifted.
        Eigen::MatrixXd probs = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp();
        probs.array().colwise() /= probs.rowwise().sum().array();
        concat.middleCols(h * w.head_dim, w.head_dim) = probs * v;
        out.attention.push_back(std::move(probs));
    }
    out.hidden = x + concat * w.wo;
    return out;
}

TinyRecommender::TinyRecommender(TinyWeights weights, HeadSelection heads)
    : weights_(std::move(weights)), heads_(heads) {
    weights_.validate();
    if (heads_.index && *heads_.index >= weights_.heads) {
        throw Error("head index " + std::to_string(*heads_.index) + " out of range");
    }
    for (int r = 0; r < static_cast<int>(weights_.vocab.size()); ++r) row_of_[weights_.vocab[r]] = r;
}

Ranking TinyRecommender::recommend(std::span<const ItemId> session, std::size_t k) {
    const TinyForward f = tiny_forward(weights_, session, true);
    const Eigen::VectorXd scores = weights_.embeddings * f.hidden.row(f.hidden.rows() - 1).transpose();
    Ranking ranking;
    for (const auto& [item, row] : row_of_) {
        if (std::find(session.begin(), session.end(), item) != session.end()) continue;
        ranking.push_back({item, scores(row)});
    }
    std::sort(ranking.begin(), ranking.end(), [](const ScoredItem& a, const ScoredItem& b) {
        return a.score != b.score ? a.score > b.score : a.item < b.item;
    });
    if (ranking.size() > k) ranking.resize(k);
    return ranking;
}

Attention TinyRecommender::attention(std::span<const ItemId> tokens) {
    const TinyForward f = tiny_forward(weights_, tokens, false);
    Attention a;
    if (heads_.index) {
        a.values = f.attention[*heads_.index];
    } else {
        a.values = Eigen::MatrixXd::Zero(f.attention[0].rows(), f.attention[0].cols());
        for (const auto& m : f.attention) a.values += m;
        a.values /= static_cast<double>(f.attention.size());
    }
    return a;
}

}  // namespace attncause
