#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "editseq/attention.hpp"
#include "editseq/cells.hpp"
#include "editseq/model_types.hpp"

namespace editseq {

// Caption-editing decoder: input-caption encoder, attention LSTM, hard
// memory-copy attention, Copy-LSTM and vocabulary projection.
class EditNet {
public:
    EditNet(const ModelConfig& cfg, Rng& rng);

    const ModelConfig& config() const { return cfg_; }

    EncodedCaption encode_caption(std::span<const int64_t> tokens) const;

    struct StepHooks {
        const ScmaMasks* frozen_masks = nullptr;  // gradcheck surrogate
        std::optional<double> copy_gate_override;
        std::optional<double> context_gate_override;
    };

    struct StepTrace {
        int64_t attention_argmax = -1;
        double alpha_max = 0.0;
        double copy_gate_mean = 0.0;
    };

    struct StepResult {
        Tensor logits;
        EditNetState state;
        StepTrace trace;
    };

    // One decode step: attention LSTM over [w_t; h_n^e; mean features;
    // h_{t-1}^2], textual attention shared between the memory copy and the
    // soft context, context gating, optional visual attention, Copy-LSTM,
    // vocabulary projection.
    StepResult step(const EditNetState& state, int64_t prev_word, const VisualFeatures* vis,
                    const EncodedCaption& enc, const StepHooks* hooks = nullptr) const;

    struct TeacherForcedResult {
        std::vector<Tensor> step_distributions;  // one softmax per target
        Tensor final_language_hidden;
        std::vector<StepTrace> traces;
    };

    // Emits exactly targets.size() distributions. At ss_prob > 0, each input
    // after the first is the previous argmax prediction with that
    // probability (scheduled sampling); rng may be null when ss_prob is 0.
    TeacherForcedResult teacher_forced(const EncodedCaption& enc, const VisualFeatures* vis,
                                       std::span<const int64_t> targets, double ss_prob = 0.0,
                                       Rng* rng = nullptr,
                                       const StepHooks* hooks = nullptr) const;

    std::vector<NamedTensor> parameters(const std::string& prefix = "editnet") const;

    // Parameter groups are public: tests clamp and inspect them directly.
    Tensor embedding;  // [vocab, embed]
    LstmWeights encoder;
    LstmWeights attention_lstm;
    CopyLstmWeights language_lstm;
    AdditiveAttentionWeights text_attention;
    AdditiveAttentionWeights visual_attention;  // defined when use_visual
    ContextGateWeights gate;                    // defined when use_context_gate
    Tensor w_vocab, b_vocab;
    Tensor w_mse, b_mse;  // projection for the hidden-state MSE objective

private:
    ModelConfig cfg_;
};

}  // namespace editseq
