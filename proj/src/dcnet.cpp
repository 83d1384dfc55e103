#include "editseq/dcnet.hpp"

#include <cmath>
#include <stdexcept>

namespace editseq {

Dcnet::Dcnet(const ModelConfig& cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    const int64_t h = cfg_.hidden_dim;
    const int64_t dir = cfg_.dcnet_direction_dim();
    embedding = Tensor::uniform({cfg_.vocab_size, cfg_.embed_dim}, 0.1, rng);
    encoder_fwd = LstmWeights::init(dir, cfg_.embed_dim, rng);
    encoder_bwd = LstmWeights::init(dir, cfg_.embed_dim, rng);
    attention_lstm = LstmWeights::init(h, cfg_.embed_dim + h + h, rng);
    language_lstm = LstmWeights::init(h, h + h, rng);
    attention = AdditiveAttentionWeights::init(cfg_.attn_dim, h, h, rng);
    w_vocab = Tensor::uniform({cfg_.vocab_size, h}, 1.0 / std::sqrt(static_cast<double>(h)), rng);
    b_vocab = Tensor::zeros({cfg_.vocab_size}, true);
    w_mse = Tensor::uniform({h, h}, 1.0 / std::sqrt(static_cast<double>(h)), rng);
    b_mse = Tensor::zeros({h}, true);
}

Dcnet::Encoded Dcnet::encode(std::span<const int64_t> tokens) const {
    if (tokens.empty()) throw std::invalid_argument("dcnet encode: empty token sequence");
    for (int64_t id : tokens) {
        if (id < 0 || id >= cfg_.vocab_size) {
            throw std::invalid_argument("dcnet encode: token id " + std::to_string(id) +
                                        " outside vocabulary of size " +
                                        std::to_string(cfg_.vocab_size));
        }
    }
    const int64_t n = static_cast<int64_t>(tokens.size());
    const int64_t dir = cfg_.dcnet_direction_dim();

    std::vector<Tensor> embedded;
    embedded.reserve(static_cast<size_t>(n));
    for (int64_t id : tokens) embedded.push_back(embedding_lookup(embedding, id));

    std::vector<Tensor> fwd(static_cast<size_t>(n)), bwd(static_cast<size_t>(n));
    LstmState fwd_state = LstmState::zero(dir);
    for (int64_t i = 0; i < n; ++i) {
        fwd_state = lstm_step(embedded[static_cast<size_t>(i)], fwd_state, encoder_fwd);
        fwd[static_cast<size_t>(i)] = fwd_state.h;
    }
    LstmState bwd_state = LstmState::zero(dir);
    for (int64_t i = n - 1; i >= 0; --i) {
        bwd_state = lstm_step(embedded[static_cast<size_t>(i)], bwd_state, encoder_bwd);
        bwd[static_cast<size_t>(i)] = bwd_state.h;
    }

    Encoded enc;
    enc.states.reserve(static_cast<size_t>(n));
    Tensor total;
    for (int64_t i = 0; i < n; ++i) {
        Tensor state = concat({fwd[static_cast<size_t>(i)], bwd[static_cast<size_t>(i)]});
        total = total.defined() ? add(total, state) : state;
        enc.states.push_back(std::move(state));
    }
    enc.mean_state = mul(total, 1.0 / static_cast<double>(n));
    enc.final_state = concat({fwd_state.h, bwd_state.h});
    return enc;
}

Dcnet::StepResult Dcnet::step(const EditNetState& state, int64_t prev_word,
                              const Encoded& enc) const {
    if (enc.length() < 1) throw std::invalid_argument("dcnet step: empty encoder output");
    Tensor word = embedding_lookup(embedding, prev_word);
    LstmState attn_state =
        lstm_step(concat({word, enc.mean_state, state.language.h}), state.attention, attention_lstm);
    Tensor alpha = additive_attention(attn_state.h, enc.states, attention);
    Tensor attended = soft_attend(alpha, enc.states);
    LstmState lang_state = lstm_step(concat({attn_state.h, attended}), state.language, language_lstm);

    StepResult result;
    result.logits = add(matmul(w_vocab, lang_state.h), b_vocab);
    result.state = {attn_state, lang_state};
    return result;
}

Dcnet::TeacherForcedResult Dcnet::teacher_forced(const Encoded& enc,
                                                 std::span<const int64_t> targets, double ss_prob,
                                                 Rng* rng) const {
    if (targets.empty()) throw std::invalid_argument("dcnet teacher_forced: empty target sequence");
    if (ss_prob > 0.0 && !rng) {
        throw std::invalid_argument("dcnet teacher_forced: scheduled sampling needs an rng");
    }
    TeacherForcedResult out;
    EditNetState state = EditNetState::zero(cfg_.hidden_dim);
    int64_t input = 1;  // start token
    for (size_t t = 0; t < targets.size(); ++t) {
        if (t > 0) {
            bool use_model = ss_prob > 0.0 && rng->uniform() < ss_prob;
            input = use_model ? argmax(out.step_distributions.back()) : targets[t - 1];
        }
        StepResult step_result = step(state, input, enc);
        out.step_distributions.push_back(softmax(step_result.logits));
        state = step_result.state;
    }
    out.final_language_hidden = state.language.h;
    return out;
}

std::vector<NamedTensor> Dcnet::parameters(const std::string& prefix) const {
    std::vector<NamedTensor> params;
    params.push_back({prefix + ".embedding", embedding});
    encoder_fwd.collect(prefix + ".encoder_fwd", params);
    encoder_bwd.collect(prefix + ".encoder_bwd", params);
    attention_lstm.collect(prefix + ".attention_lstm", params);
    language_lstm.collect(prefix + ".language_lstm", params);
    attention.collect(prefix + ".attention", params);
    params.push_back({prefix + ".w_vocab", w_vocab});
    params.push_back({prefix + ".b_vocab", b_vocab});
    params.push_back({prefix + ".w_mse", w_mse});
    params.push_back({prefix + ".b_mse", b_mse});
    return params;
}

}  // namespace editseq
