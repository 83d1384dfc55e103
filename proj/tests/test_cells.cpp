#include <doctest.h>

#include <cmath>

#include "editseq/cells.hpp"

using namespace editseq;

namespace {

LstmWeights zero_weights(int64_t hidden, int64_t input) {
    LstmWeights w;
    w.hidden_dim = hidden;
    w.input_dim = input;
    int64_t cols = hidden + input;
    w.w_forget = Tensor::zeros({hidden, cols}, true);
    w.w_input = Tensor::zeros({hidden, cols}, true);
    w.w_cell = Tensor::zeros({hidden, cols}, true);
    w.w_output = Tensor::zeros({hidden, cols}, true);
    w.b_forget = Tensor::zeros({hidden}, true);
    w.b_input = Tensor::zeros({hidden}, true);
    w.b_cell = Tensor::zeros({hidden}, true);
    w.b_output = Tensor::zeros({hidden}, true);
    return w;
}

std::vector<Tensor> all_params(const LstmWeights& w) {
    return {w.w_forget, w.w_input, w.w_cell, w.w_output,
            w.b_forget, w.b_input, w.b_cell, w.b_output};
}

}  // namespace

TEST_CASE("lstm_step with all-zero weights follows the hand evaluation") {
    // Gates sigmoid(0) = 0.5, candidate tanh(0) = 0, so
    // c = 0.5 * c_prev and h = 0.5 * tanh(0.5 * c_prev).
    LstmWeights w = zero_weights(2, 3);
    LstmState prev{Tensor::vector({0.2, -0.4}), Tensor::vector({1.0, -2.0})};
    Tensor x = Tensor::vector({0.7, -0.1, 0.3});
    LstmState next = lstm_step(x, prev, w);
    CHECK(next.c.at(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(next.c.at(1) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(next.h.at(0) == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
    CHECK(next.h.at(1) == doctest::Approx(0.5 * std::tanh(-1.0)).epsilon(1e-15));
}

TEST_CASE("lstm_step zero everything stays at zero") {
    LstmWeights w = zero_weights(2, 2);
    LstmState prev = LstmState::zero(2);
    LstmState next = lstm_step(Tensor::zeros({2}), prev, w);
    CHECK(next.h.at(0) == 0.0);
    CHECK(next.h.at(1) == 0.0);
    CHECK(next.c.at(0) == 0.0);
    CHECK(next.c.at(1) == 0.0);
}

TEST_CASE("lstm_step rejects dimension mismatches") {
    Rng rng(1);
    LstmWeights w = LstmWeights::init(4, 3, rng);
    CHECK_THROWS_AS(lstm_step(Tensor::zeros({5}), LstmState::zero(4), w), std::invalid_argument);
    CHECK_THROWS_AS(lstm_step(Tensor::zeros({3}), LstmState::zero(2), w), std::invalid_argument);
}

TEST_CASE("lstm_step gradients match finite differences") {
    Rng rng(11);
    LstmWeights w = LstmWeights::init(3, 2, rng);
    Tensor x = Tensor::vector({0.9, -0.6});
    LstmState prev{Tensor::vector({0.8, -0.9, 0.6}), Tensor::vector({1.2, -0.9, 1.4})};
    auto params = all_params(w);
    auto f = [&]() {
        LstmState s = lstm_step(x, prev, w);
        return add(sum(s.h), sum(mul(s.c, s.c)));
    };
    FdReport rep = finite_diff_check(std::function<Tensor()>(f), params, 1e-5);
    CHECK(rep.max_rel_error < 1e-6);
}

TEST_CASE("copy gate clamped to one copies the encoder memory exactly") {
    Rng rng(3);
    CopyLstmWeights w = CopyLstmWeights::init(3, 2, rng);
    LstmState prev{Tensor::uniform({3}, 0.7, rng, false), Tensor::uniform({3}, 0.7, rng, false)};
    Tensor x = Tensor::uniform({2}, 0.7, rng, false);
    Tensor copied = Tensor::uniform({3}, 0.9, rng, false);
    LstmState out = copy_lstm_step(x, prev, copied, w, 1.0);
    for (int64_t i = 0; i < 3; ++i) CHECK(out.c.at(i) == copied.at(i));
}

TEST_CASE("copy gate clamped to zero reduces bitwise to the standard LSTM") {
    Rng rng(4);
    CopyLstmWeights w = CopyLstmWeights::init(4, 3, rng);
    LstmState copy_state = LstmState::zero(4);
    LstmState plain_state = LstmState::zero(4);
    for (int step = 0; step < 100; ++step) {
        Tensor x = Tensor::uniform({3}, 1.0, rng, false);
        Tensor copied = Tensor::uniform({4}, 1.0, rng, false);
        copy_state = copy_lstm_step(x, copy_state, copied, w, 0.0);
        plain_state = lstm_step(x, plain_state, w.base);
        for (int64_t i = 0; i < 4; ++i) {
            CHECK(copy_state.h.at(i) == plain_state.h.at(i));
            CHECK(copy_state.c.at(i) == plain_state.c.at(i));
        }
    }
}

TEST_CASE("copy gate at one half interpolates the memories linearly") {
    // Zero weights make the internal memory 0.5 * c_prev = [2]; against a
    // copied memory of [4] a gate of exactly one half yields [3].
    CopyLstmWeights w;
    w.base = zero_weights(1, 1);
    w.w_copy = Tensor::zeros({1, 2}, true);  // sigmoid(0) = 0.5, no override needed
    LstmState prev{Tensor::vector({0.0}), Tensor::vector({4.0})};
    Tensor gate;
    LstmState out = copy_lstm_step(Tensor::vector({0.0}), prev, Tensor::vector({4.0}), w,
                                   std::nullopt, &gate);
    CHECK(gate.at(0) == 0.5);
    CHECK(out.c.at(0) == 3.0);
}

TEST_CASE("copied memory lies between the two source memories") {
    Rng rng(5);
    CopyLstmWeights w = CopyLstmWeights::init(3, 2, rng);
    LstmState state = LstmState::zero(3);
    for (int step = 0; step < 50; ++step) {
        Tensor x = Tensor::uniform({2}, 1.5, rng, false);
        Tensor copied = Tensor::uniform({3}, 2.0, rng, false);
        LstmState plain = lstm_step(x, state, w.base);
        LstmState next = copy_lstm_step(x, state, copied, w);
        for (int64_t i = 0; i < 3; ++i) {
            double lo = std::min(plain.c.at(i), copied.at(i));
            double hi = std::max(plain.c.at(i), copied.at(i));
            CHECK(next.c.at(i) >= lo - 1e-15);
            CHECK(next.c.at(i) <= hi + 1e-15);
            CHECK(std::abs(next.h.at(i)) <= 1.0);
            CHECK(std::abs(plain.h.at(i)) <= 1.0);
        }
        state = next;
    }
}

TEST_CASE("copy_lstm_step gradients include the copied memory path") {
    Rng rng(12);
    CopyLstmWeights w = CopyLstmWeights::init(3, 2, rng);
    Tensor x = Tensor::vector({0.9, -0.6});
    Tensor copied = Tensor::vector({1.1, -0.8, 0.7}, true);  // check d/d c_copied too
    // Memory components bounded away from zero keep every forget-gate
    // gradient above the central-difference noise floor.
    LstmState prev{Tensor::vector({0.8, -0.9, 0.6}), Tensor::vector({1.2, -0.9, 1.4})};
    std::vector<Tensor> params = all_params(w.base);
    params.push_back(w.w_copy);
    params.push_back(copied);
    auto f = [&]() {
        LstmState s = copy_lstm_step(x, prev, copied, w);
        return add(sum(s.h), sum(mul(s.c, s.c)));
    };
    FdReport rep = finite_diff_check(std::function<Tensor()>(f), params, 1e-5);
    CHECK(rep.max_rel_error < 1e-6);
}

TEST_CASE("copy_lstm_step rejects mismatched copied memory") {
    Rng rng(6);
    CopyLstmWeights w = CopyLstmWeights::init(3, 2, rng);
    CHECK_THROWS_AS(copy_lstm_step(Tensor::zeros({2}), LstmState::zero(3), Tensor::zeros({5}), w),
                    std::invalid_argument);
}
