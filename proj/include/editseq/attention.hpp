#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "editseq/autodiff.hpp"

namespace editseq {

struct AdditiveAttentionWeights {
    Tensor w_key;    // [attn, key_dim]
    Tensor w_query;  // [attn, query_dim]
    Tensor w_score;  // [attn]

    static AdditiveAttentionWeights init(int64_t attn_dim, int64_t key_dim, int64_t query_dim,
                                         Rng& rng);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out) const;
};

// alpha = softmax over keys of w_score . tanh(w_key k_i + w_query q).
Tensor additive_attention(const Tensor& query, std::span<const Tensor> keys,
                          const AdditiveAttentionWeights& w);

// Value-level straight-through masks for the hard selection: the binary
// mask is one-hot at the argmax, the shifting mask carries 1 - alpha_max
// there. alpha*m_binary + m_shift is exactly 1 at the argmax and exactly 0
// elsewhere.
struct ScmaMasks {
    std::vector<double> m_binary;
    std::vector<double> m_shift;
    int64_t index = 0;
    double alpha_max = 0.0;
};
ScmaMasks make_scma_masks(std::span<const double> alpha);

// Hard selection of the memory state at the attention argmax. The forward
// value is exactly memories[argmax(alpha)]; the masks live outside the
// gradient record, so backward reaches the selected memory with coefficient
// one, the argmax attention weight scaled by the selected memory, and
// nothing else. `index_out`, when non-null, receives the selected index.
// `frozen_masks` substitutes fixed masks for the ones derived from alpha:
// gradient checking perturbs inputs against that differentiable surrogate,
// since the production forward is locally constant in alpha.
Tensor scma_select(const Tensor& alpha, std::span<const Tensor> memories,
                   int64_t* index_out = nullptr, const ScmaMasks* frozen_masks = nullptr);

// c = sum_i alpha_i values_i.
Tensor soft_attend(const Tensor& alpha, std::span<const Tensor> values);

struct ContextGateWeights {
    Tensor w_source;  // [hidden, hidden]           projection of c_t
    Tensor w_target;  // [hidden, embed + hidden]   projection of [w_t; h_t]
    Tensor w_gate;    // [hidden, embed + 2*hidden] gate over [w_t; h_t; c_t]

    static ContextGateWeights init(int64_t hidden_dim, int64_t embed_dim, Rng& rng);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out) const;
};

// c_m = z (.) tanh(W_source c_t) + (1-z) (.) tanh(W_target [w_t; h_t]),
// z = sigmoid(W_gate [w_t; h_t; c_t]). `gate_override` is a test hook.
Tensor context_gate(const Tensor& word_embedding, const Tensor& hidden, const Tensor& attended,
                    const ContextGateWeights& w,
                    std::optional<double> gate_override = std::nullopt);

// Additive attention over feature vectors with its own parameters,
// returning the alpha-weighted sum of the features.
Tensor visual_attend(const Tensor& query, std::span<const Tensor> features,
                     const AdditiveAttentionWeights& w);

}  // namespace editseq
