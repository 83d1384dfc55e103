#pragma once

#include <cstdint>
#include <vector>

#include "editseq/autodiff.hpp"
#include "editseq/cells.hpp"

namespace editseq {

struct ModelConfig {
    int64_t vocab_size = 0;
    int64_t embed_dim = 64;
    int64_t hidden_dim = 96;
    int64_t attn_dim = 48;
    int64_t k = 8;     // number of visual feature vectors
    int64_t d_v = 64;  // feature vector dimension
    bool use_visual = true;
    bool use_context_gate = true;
    bool hard_scma = true;
    bool fuse_dcnet = true;

    // The denoising captioner derives its per-direction encoder width from
    // the shared hidden size, so that must be even.
    int64_t dcnet_direction_dim() const { return hidden_dim / 2; }
    void validate() const;

    static ModelConfig paper_dims();
};

// Per-word hidden and memory states of the input-caption encoder, plus its
// final hidden state.
struct EncodedCaption {
    std::vector<Tensor> hidden_states;
    std::vector<Tensor> memory_states;
    Tensor final_hidden;
    int64_t length() const { return static_cast<int64_t>(hidden_states.size()); }
};

struct VisualFeatures {
    std::vector<Tensor> vectors;  // k vectors of dimension d_v
    Tensor mean_pooled;           // arithmetic mean of the vectors

    static VisualFeatures from_vectors(std::vector<Tensor> vectors);
};

// Two-LSTM decoder state threaded through decoding.
struct EditNetState {
    LstmState attention;  // h_t^1, c_t^1
    LstmState language;   // h_t^2 and the interpolated memory

    static EditNetState zero(int64_t hidden_dim) {
        return {LstmState::zero(hidden_dim), LstmState::zero(hidden_dim)};
    }
};

}  // namespace editseq
