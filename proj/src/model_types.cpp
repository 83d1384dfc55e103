#include "editseq/model_types.hpp"

#include <stdexcept>

namespace editseq {

void ModelConfig::validate() const {
    auto positive = [](int64_t v, const char* name) {
        if (v < 1) {
            throw std::invalid_argument(std::string("ModelConfig: ") + name + " must be >= 1, got " +
                                        std::to_string(v));
        }
    };
    positive(vocab_size, "vocab_size");
    positive(embed_dim, "embed_dim");
    positive(hidden_dim, "hidden_dim");
    positive(attn_dim, "attn_dim");
    positive(k, "k");
    positive(d_v, "d_v");
    if (hidden_dim % 2 != 0) {
        throw std::invalid_argument("ModelConfig: hidden_dim must be even, got " +
                                    std::to_string(hidden_dim));
    }
}

ModelConfig ModelConfig::paper_dims() {
    ModelConfig cfg;
    cfg.embed_dim = 1024;
    cfg.hidden_dim = 1024;
    cfg.attn_dim = 512;
    cfg.k = 36;
    cfg.d_v = 2048;
    return cfg;
}

VisualFeatures VisualFeatures::from_vectors(std::vector<Tensor> vectors) {
    if (vectors.empty()) throw std::invalid_argument("VisualFeatures: need at least one vector");
    int64_t d = vectors[0].dim(0);
    std::vector<double> mean(static_cast<size_t>(d), 0.0);
    for (const Tensor& v : vectors) {
        if (v.ndim() != 1 || v.dim(0) != d) {
            throw std::invalid_argument("VisualFeatures: inconsistent vector shapes");
        }
        auto vals = v.values();
        for (int64_t i = 0; i < d; ++i) mean[i] += vals[i];
    }
    double inv_k = 1.0 / static_cast<double>(vectors.size());
    for (double& m : mean) m *= inv_k;
    VisualFeatures out;
    out.vectors = std::move(vectors);
    out.mean_pooled = Tensor::from({d}, std::move(mean));
    return out;
}

}  // namespace editseq
