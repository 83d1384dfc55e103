#include "editseq/editnet.hpp"

#include <cmath>
#include <stdexcept>

namespace editseq {

namespace {

Tensor linear_init(int64_t rows, int64_t cols, Rng& rng) {
    return Tensor::uniform({rows, cols}, 1.0 / std::sqrt(static_cast<double>(cols)), rng);
}

}  // namespace

EditNet::EditNet(const ModelConfig& cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    const int64_t h = cfg_.hidden_dim;
    embedding = Tensor::uniform({cfg_.vocab_size, cfg_.embed_dim}, 0.1, rng);
    encoder = LstmWeights::init(h, cfg_.embed_dim, rng);
    int64_t attn_in = cfg_.embed_dim + h + (cfg_.use_visual ? cfg_.d_v : 0) + h;
    attention_lstm = LstmWeights::init(h, attn_in, rng);
    int64_t lang_in = h + (cfg_.use_visual ? cfg_.d_v : 0) + h;
    language_lstm = CopyLstmWeights::init(h, lang_in, rng);
    text_attention = AdditiveAttentionWeights::init(cfg_.attn_dim, h, h, rng);
    if (cfg_.use_visual) {
        visual_attention = AdditiveAttentionWeights::init(cfg_.attn_dim, cfg_.d_v, h, rng);
    }
    if (cfg_.use_context_gate) {
        gate = ContextGateWeights::init(h, cfg_.embed_dim, rng);
    }
    w_vocab = linear_init(cfg_.vocab_size, h, rng);
    b_vocab = Tensor::zeros({cfg_.vocab_size}, true);
    w_mse = linear_init(h, h, rng);
    b_mse = Tensor::zeros({h}, true);
}

EncodedCaption EditNet::encode_caption(std::span<const int64_t> tokens) const {
    if (tokens.empty()) throw std::invalid_argument("encode_caption: empty token sequence");
    for (int64_t id : tokens) {
        if (id < 0 || id >= cfg_.vocab_size) {
            throw std::invalid_argument("encode_caption: token id " + std::to_string(id) +
                                        " outside vocabulary of size " +
                                        std::to_string(cfg_.vocab_size));
        }
    }
    EncodedCaption enc;
    LstmState state = LstmState::zero(cfg_.hidden_dim);
    for (int64_t id : tokens) {
        state = lstm_step(embedding_lookup(embedding, id), state, encoder);
        enc.hidden_states.push_back(state.h);
        enc.memory_states.push_back(state.c);
    }
    enc.final_hidden = state.h;
    return enc;
}

EditNet::StepResult EditNet::step(const EditNetState& state, int64_t prev_word,
                                  const VisualFeatures* vis, const EncodedCaption& enc,
                                  const StepHooks* hooks) const {
    if (enc.length() < 1) throw std::invalid_argument("editnet step: empty encoded caption");
    if (cfg_.use_visual && !vis) {
        throw std::invalid_argument("editnet step: visual features required by configuration");
    }
    Tensor word = embedding_lookup(embedding, prev_word);

    std::vector<Tensor> attn_inputs{word, enc.final_hidden};
    if (cfg_.use_visual) attn_inputs.push_back(vis->mean_pooled);
    attn_inputs.push_back(state.language.h);
    LstmState attn_state = lstm_step(concat(attn_inputs), state.attention, attention_lstm);

    Tensor alpha = additive_attention(attn_state.h, enc.hidden_states, text_attention);

    StepTrace trace;
    Tensor copied;
    if (cfg_.hard_scma) {
        copied = scma_select(alpha, enc.memory_states, &trace.attention_argmax,
                             hooks ? hooks->frozen_masks : nullptr);
    } else {
        copied = soft_attend(alpha, enc.memory_states);
        trace.attention_argmax = argmax(alpha);
    }
    trace.alpha_max = alpha.at(trace.attention_argmax);

    Tensor attended_text = soft_attend(alpha, enc.hidden_states);
    Tensor gated = cfg_.use_context_gate
                       ? context_gate(word, attn_state.h, attended_text, gate,
                                      hooks ? hooks->context_gate_override : std::nullopt)
                       : attended_text;

    std::vector<Tensor> lang_inputs{attn_state.h};
    if (cfg_.use_visual) lang_inputs.push_back(visual_attend(attn_state.h, vis->vectors, visual_attention));
    lang_inputs.push_back(gated);

    Tensor copy_gate;
    LstmState lang_state = copy_lstm_step(concat(lang_inputs), state.language, copied, language_lstm,
                                          hooks ? hooks->copy_gate_override : std::nullopt,
                                          &copy_gate);
    double gate_mean = 0.0;
    for (double g : copy_gate.values()) gate_mean += g;
    trace.copy_gate_mean = gate_mean / static_cast<double>(copy_gate.size());

    StepResult result;
    result.logits = add(matmul(w_vocab, lang_state.h), b_vocab);
    result.state = {attn_state, lang_state};
    result.trace = trace;
    return result;
}

EditNet::TeacherForcedResult EditNet::teacher_forced(const EncodedCaption& enc,
                                                     const VisualFeatures* vis,
                                                     std::span<const int64_t> targets,
                                                     double ss_prob, Rng* rng,
                                                     const StepHooks* hooks) const {
    if (targets.empty()) throw std::invalid_argument("teacher_forced: empty target sequence");
    if (ss_prob > 0.0 && !rng) {
        throw std::invalid_argument("teacher_forced: scheduled sampling needs an rng");
    }
    TeacherForcedResult out;
    EditNetState state = EditNetState::zero(cfg_.hidden_dim);
    int64_t input = 1;  // start token
    for (size_t t = 0; t < targets.size(); ++t) {
        if (t > 0) {
            bool use_model = ss_prob > 0.0 && rng->uniform() < ss_prob;
            input = use_model ? argmax(out.step_distributions.back()) : targets[t - 1];
        }
        StepResult step_result = step(state, input, vis, enc, hooks);
        out.step_distributions.push_back(softmax(step_result.logits));
        out.traces.push_back(step_result.trace);
        state = step_result.state;
    }
    out.final_language_hidden = state.language.h;
    return out;
}

std::vector<NamedTensor> EditNet::parameters(const std::string& prefix) const {
    std::vector<NamedTensor> params;
    params.push_back({prefix + ".embedding", embedding});
    encoder.collect(prefix + ".encoder", params);
    attention_lstm.collect(prefix + ".attention_lstm", params);
    language_lstm.collect(prefix + ".language_lstm", params);
    text_attention.collect(prefix + ".text_attention", params);
    if (cfg_.use_visual) visual_attention.collect(prefix + ".visual_attention", params);
    if (cfg_.use_context_gate) gate.collect(prefix + ".context_gate", params);
    params.push_back({prefix + ".w_vocab", w_vocab});
    params.push_back({prefix + ".b_vocab", b_vocab});
    params.push_back({prefix + ".w_mse", w_mse});
    params.push_back({prefix + ".b_mse", b_mse});
    return params;
}

}  // namespace editseq
