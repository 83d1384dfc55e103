#include "editseq/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace editseq {

AdditiveAttentionWeights AdditiveAttentionWeights::init(int64_t attn_dim, int64_t key_dim,
                                                        int64_t query_dim, Rng& rng) {
    AdditiveAttentionWeights w;
    w.w_key = Tensor::uniform({attn_dim, key_dim}, 1.0 / std::sqrt(static_cast<double>(key_dim)), rng);
    w.w_query = Tensor::uniform({attn_dim, query_dim}, 1.0 / std::sqrt(static_cast<double>(query_dim)), rng);
    w.w_score = Tensor::uniform({attn_dim}, 1.0 / std::sqrt(static_cast<double>(attn_dim)), rng);
    return w;
}

void AdditiveAttentionWeights::collect(const std::string& prefix,
                                       std::vector<NamedTensor>& out) const {
    out.push_back({prefix + ".w_key", w_key});
    out.push_back({prefix + ".w_query", w_query});
    out.push_back({prefix + ".w_score", w_score});
}

Tensor additive_attention(const Tensor& query, std::span<const Tensor> keys,
                          const AdditiveAttentionWeights& w) {
    if (keys.empty()) throw std::invalid_argument("additive_attention: no keys");
    Tensor projected_query = matmul(w.w_query, query);
    std::vector<Tensor> scores;
    scores.reserve(keys.size());
    for (const Tensor& key : keys) {
        Tensor hidden = tanh(add(matmul(w.w_key, key), projected_query));
        scores.push_back(sum(mul(w.w_score, hidden)));
    }
    return softmax(concat(scores));
}

ScmaMasks make_scma_masks(std::span<const double> alpha) {
    if (alpha.empty()) throw std::invalid_argument("make_scma_masks: empty attention vector");
    ScmaMasks masks;
    masks.index = argmax(alpha);
    masks.alpha_max = alpha[masks.index];
    masks.m_binary.assign(alpha.size(), 0.0);
    masks.m_shift.assign(alpha.size(), 0.0);
    masks.m_binary[masks.index] = 1.0;
    masks.m_shift[masks.index] = 1.0 - masks.alpha_max;
    return masks;
}

Tensor scma_select(const Tensor& alpha, std::span<const Tensor> memories, int64_t* index_out,
                   const ScmaMasks* frozen_masks) {
    if (static_cast<size_t>(alpha.size()) != memories.size()) {
        throw std::invalid_argument("scma_select: " + std::to_string(alpha.size()) +
                                    " attention weights vs " + std::to_string(memories.size()) +
                                    " memories");
    }
    ScmaMasks masks = frozen_masks ? *frozen_masks : make_scma_masks(alpha.values());
    if (masks.m_binary.size() != memories.size()) {
        throw std::invalid_argument("scma_select: mask length " + std::to_string(masks.m_binary.size()) +
                                    " vs " + std::to_string(memories.size()) + " memories");
    }
    if (index_out) *index_out = masks.index;
    Tensor result;
    for (size_t i = 0; i < memories.size(); ++i) {
        Tensor coeff = add(mul(slice(alpha, static_cast<int64_t>(i), 1), Tensor::scalar(masks.m_binary[i])),
                           Tensor::scalar(masks.m_shift[i]));
        Tensor term = mul(memories[i], coeff);
        result = result.defined() ? add(result, term) : term;
    }
    return result;
}

Tensor soft_attend(const Tensor& alpha, std::span<const Tensor> values) {
    if (static_cast<size_t>(alpha.size()) != values.size()) {
        throw std::invalid_argument("soft_attend: " + std::to_string(alpha.size()) +
                                    " attention weights vs " + std::to_string(values.size()) +
                                    " values");
    }
    Tensor result;
    for (size_t i = 0; i < values.size(); ++i) {
        Tensor term = mul(values[i], slice(alpha, static_cast<int64_t>(i), 1));
        result = result.defined() ? add(result, term) : term;
    }
    return result;
}

ContextGateWeights ContextGateWeights::init(int64_t hidden_dim, int64_t embed_dim, Rng& rng) {
    ContextGateWeights w;
    auto bound = [](int64_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };
    w.w_source = Tensor::uniform({hidden_dim, hidden_dim}, bound(hidden_dim), rng);
    w.w_target = Tensor::uniform({hidden_dim, embed_dim + hidden_dim}, bound(embed_dim + hidden_dim), rng);
    w.w_gate = Tensor::uniform({hidden_dim, embed_dim + 2 * hidden_dim},
                               bound(embed_dim + 2 * hidden_dim), rng);
    return w;
}

void ContextGateWeights::collect(const std::string& prefix, std::vector<NamedTensor>& out) const {
    out.push_back({prefix + ".w_source", w_source});
    out.push_back({prefix + ".w_target", w_target});
    out.push_back({prefix + ".w_gate", w_gate});
}

Tensor context_gate(const Tensor& word_embedding, const Tensor& hidden, const Tensor& attended,
                    const ContextGateWeights& w, std::optional<double> gate_override) {
    Tensor gate = gate_override
                      ? Tensor::full({w.w_gate.dim(0)}, *gate_override)
                      : sigmoid(matmul(w.w_gate, concat({word_embedding, hidden, attended})));
    Tensor source = tanh(matmul(w.w_source, attended));
    Tensor target = tanh(matmul(w.w_target, concat({word_embedding, hidden})));
    return add(mul(gate, source), mul(sub(Tensor::scalar(1.0), gate), target));
}

Tensor visual_attend(const Tensor& query, std::span<const Tensor> features,
                     const AdditiveAttentionWeights& w) {
    if (features.empty()) throw std::invalid_argument("visual_attend: no feature vectors");
    Tensor alpha = additive_attention(query, features, w);
    return soft_attend(alpha, features);
}

}  // namespace editseq
