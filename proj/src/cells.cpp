#include "editseq/cells.hpp"

#include <cmath>
#include <stdexcept>

namespace editseq {

namespace {

Tensor init_gate_matrix(int64_t rows, int64_t cols, Rng& rng) {
    return Tensor::uniform({rows, cols}, 1.0 / std::sqrt(static_cast<double>(cols)), rng);
}

void check_dims(const Tensor& x, const LstmState& prev, const LstmWeights& w, const char* op) {
    if (x.ndim() != 1 || x.dim(0) != w.input_dim) {
        throw std::invalid_argument(std::string(op) + ": input dim " + shape_str(x.shape()) +
                                    " does not match weights input dim " +
                                    std::to_string(w.input_dim));
    }
    if (prev.h.dim(0) != w.hidden_dim || prev.c.dim(0) != w.hidden_dim) {
        throw std::invalid_argument(std::string(op) + ": state dim " + shape_str(prev.h.shape()) +
                                    " does not match hidden dim " + std::to_string(w.hidden_dim));
    }
}

struct LstmGates {
    Tensor forget, input, cell_candidate, cell, output;
};

// Shared gate arithmetic: the Copy-LSTM runs the identical sequence up to
// the memory interpolation so the clamped-gate reduction is bitwise.
LstmGates compute_gates(const Tensor& x, const LstmState& prev, const LstmWeights& w) {
    Tensor hx = concat({prev.h, x});
    LstmGates g;
    g.forget = sigmoid(add(matmul(w.w_forget, hx), w.b_forget));
    g.input = sigmoid(add(matmul(w.w_input, hx), w.b_input));
    g.cell_candidate = tanh(add(matmul(w.w_cell, hx), w.b_cell));
    g.cell = add(mul(g.forget, prev.c), mul(g.input, g.cell_candidate));
    g.output = sigmoid(add(matmul(w.w_output, hx), w.b_output));
    return g;
}

}  // namespace

LstmWeights LstmWeights::init(int64_t hidden_dim, int64_t input_dim, Rng& rng) {
    if (hidden_dim < 1 || input_dim < 1) {
        throw std::invalid_argument("LstmWeights::init: dimensions must be positive");
    }
    LstmWeights w;
    w.hidden_dim = hidden_dim;
    w.input_dim = input_dim;
    int64_t cols = hidden_dim + input_dim;
    w.w_forget = init_gate_matrix(hidden_dim, cols, rng);
    w.w_input = init_gate_matrix(hidden_dim, cols, rng);
    w.w_cell = init_gate_matrix(hidden_dim, cols, rng);
    w.w_output = init_gate_matrix(hidden_dim, cols, rng);
    w.b_forget = Tensor::full({hidden_dim}, 1.0, true);
    w.b_input = Tensor::zeros({hidden_dim}, true);
    w.b_cell = Tensor::zeros({hidden_dim}, true);
    w.b_output = Tensor::zeros({hidden_dim}, true);
    return w;
}

void LstmWeights::collect(const std::string& prefix, std::vector<NamedTensor>& out) const {
    out.push_back({prefix + ".w_forget", w_forget});
    out.push_back({prefix + ".w_input", w_input});
    out.push_back({prefix + ".w_cell", w_cell});
    out.push_back({prefix + ".w_output", w_output});
    out.push_back({prefix + ".b_forget", b_forget});
    out.push_back({prefix + ".b_input", b_input});
    out.push_back({prefix + ".b_cell", b_cell});
    out.push_back({prefix + ".b_output", b_output});
}

CopyLstmWeights CopyLstmWeights::init(int64_t hidden_dim, int64_t input_dim, Rng& rng) {
    CopyLstmWeights w;
    w.base = LstmWeights::init(hidden_dim, input_dim, rng);
    w.w_copy = init_gate_matrix(hidden_dim, 2 * hidden_dim, rng);
    return w;
}

void CopyLstmWeights::collect(const std::string& prefix, std::vector<NamedTensor>& out) const {
    base.collect(prefix, out);
    out.push_back({prefix + ".w_copy", w_copy});
}

LstmState lstm_step(const Tensor& x, const LstmState& prev, const LstmWeights& w) {
    check_dims(x, prev, w, "lstm_step");
    LstmGates g = compute_gates(x, prev, w);
    return {mul(g.output, tanh(g.cell)), g.cell};
}

LstmState copy_lstm_step(const Tensor& x, const LstmState& prev, const Tensor& c_copied,
                         const CopyLstmWeights& w, std::optional<double> copy_gate_override,
                         Tensor* copy_gate_out) {
    check_dims(x, prev, w.base, "copy_lstm_step");
    if (c_copied.ndim() != 1 || c_copied.dim(0) != w.base.hidden_dim) {
        throw std::invalid_argument("copy_lstm_step: copied memory dim " +
                                    shape_str(c_copied.shape()) + " does not match hidden dim " +
                                    std::to_string(w.base.hidden_dim));
    }
    LstmGates g = compute_gates(x, prev, w.base);
    Tensor gate = copy_gate_override
                      ? Tensor::full({w.base.hidden_dim}, *copy_gate_override)
                      : sigmoid(matmul(w.w_copy, concat({g.cell, c_copied})));
    if (copy_gate_out) *copy_gate_out = gate;
    Tensor adapted = add(mul(gate, c_copied), mul(sub(Tensor::scalar(1.0), gate), g.cell));
    return {mul(g.output, tanh(adapted)), adapted};
}

}  // namespace editseq
