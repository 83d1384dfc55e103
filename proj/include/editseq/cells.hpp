#pragma once

#include <optional>
#include <string>
#include <vector>

#include "editseq/autodiff.hpp"

namespace editseq {

struct LstmState {
    Tensor h;
    Tensor c;

    static LstmState zero(int64_t hidden_dim) {
        return {Tensor::zeros({hidden_dim}), Tensor::zeros({hidden_dim})};
    }
};

// Gate weights over the concatenation [h_{t-1}, x_t]: one combined matrix
// per gate of shape [hidden, hidden + input].
struct LstmWeights {
    Tensor w_forget, w_input, w_cell, w_output;
    Tensor b_forget, b_input, b_cell, b_output;
    int64_t hidden_dim = 0;
    int64_t input_dim = 0;

    // Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; forget bias 1.
    static LstmWeights init(int64_t hidden_dim, int64_t input_dim, Rng& rng);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out) const;
};

// LstmWeights plus the copy gate matrix over [C_t, C_s^e].
struct CopyLstmWeights {
    LstmWeights base;
    Tensor w_copy;  // [hidden, 2*hidden]

    static CopyLstmWeights init(int64_t hidden_dim, int64_t input_dim, Rng& rng);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out) const;
};

LstmState lstm_step(const Tensor& x, const LstmState& prev, const LstmWeights& w);

// Copy-LSTM step: computes the standard gates, then interpolates the memory
// state with the copied encoder memory through the copy gate. The returned
// state carries the interpolated memory, which is also the recurrent memory
// for the next step. `copy_gate_override` clamps the gate to a constant
// (test hook for the reduction property); `copy_gate_out`, when non-null,
// receives the gate activations.
LstmState copy_lstm_step(const Tensor& x, const LstmState& prev, const Tensor& c_copied,
                         const CopyLstmWeights& w,
                         std::optional<double> copy_gate_override = std::nullopt,
                         Tensor* copy_gate_out = nullptr);

}  // namespace editseq
