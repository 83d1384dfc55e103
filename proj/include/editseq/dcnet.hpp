#pragma once

#include <span>
#include <string>
#include <vector>

#include "editseq/attention.hpp"
#include "editseq/cells.hpp"
#include "editseq/model_types.hpp"

namespace editseq {

// Denoising captioner: bi-directional LSTM encoder over the noisy caption
// and a two-LSTM top-down decoder with additive attention. Text only; no
// visual input anywhere, and no parameters shared with the editor.
class Dcnet {
public:
    Dcnet(const ModelConfig& cfg, Rng& rng);

    const ModelConfig& config() const { return cfg_; }

    struct Encoded {
        std::vector<Tensor> states;  // per-word forward/backward concatenation
        Tensor mean_state;
        Tensor final_state;  // [fwd final h; bwd final h] -- the MSE target
        int64_t length() const { return static_cast<int64_t>(states.size()); }
    };

    Encoded encode(std::span<const int64_t> tokens) const;

    struct StepResult {
        Tensor logits;
        EditNetState state;
    };

    StepResult step(const EditNetState& state, int64_t prev_word, const Encoded& enc) const;

    struct TeacherForcedResult {
        std::vector<Tensor> step_distributions;
        Tensor final_language_hidden;
    };

    TeacherForcedResult teacher_forced(const Encoded& enc, std::span<const int64_t> targets,
                                       double ss_prob = 0.0, Rng* rng = nullptr) const;

    std::vector<NamedTensor> parameters(const std::string& prefix = "dcnet") const;

    Tensor embedding;
    LstmWeights encoder_fwd, encoder_bwd;  // per-direction width hidden/2
    LstmWeights attention_lstm, language_lstm;
    AdditiveAttentionWeights attention;
    Tensor w_vocab, b_vocab;
    Tensor w_mse, b_mse;

private:
    ModelConfig cfg_;
};

}  // namespace editseq
