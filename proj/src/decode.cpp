#include "editseq/decode.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "editseq/corpus.hpp"

namespace editseq {

Tensor fuse_distributions(const Tensor& p_edit, const Tensor& p_dc) {
    if (p_edit.shape() != p_dc.shape()) {
        throw std::invalid_argument("fuse_distributions: shape mismatch " +
                                    shape_str(p_edit.shape()) + " vs " + shape_str(p_dc.shape()));
    }
    auto check_normalized = [](const Tensor& p, const char* name) {
        double total = 0.0;
        for (double v : p.values()) total += v;
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument(std::string("fuse_distributions: ") + name +
                                        " does not sum to 1 (got " + std::to_string(total) + ")");
        }
    };
    check_normalized(p_edit, "editor distribution");
    check_normalized(p_dc, "denoiser distribution");
    return mul(add(p_edit, p_dc), 0.5);
}

DecodeResult greedy_decode(const StepFn& step, int64_t max_len) {
    if (max_len < 1) throw std::invalid_argument("greedy_decode: max_len must be >= 1");
    DecodeResult result;
    int64_t prev = Vocab::kStart;
    for (int64_t t = 0; t < max_len; ++t) {
        Tensor probs = step(prev);
        int64_t token = argmax(probs);
        if (token == Vocab::kEnd) break;
        result.tokens.push_back(token);
        prev = token;
    }
    return result;
}

SampleResult sample_decode(const StepFn& step, int64_t max_len, Rng& rng) {
    if (max_len < 1) throw std::invalid_argument("sample_decode: max_len must be >= 1");
    SampleResult result;
    int64_t prev = Vocab::kStart;
    for (int64_t t = 0; t < max_len; ++t) {
        Tensor probs = step(prev);
        int64_t token = static_cast<int64_t>(rng.multinomial(probs.values()));
        result.step_log_probs.push_back(log(slice(probs, token, 1)));
        if (token == Vocab::kEnd) break;
        result.tokens.push_back(token);
        prev = token;
    }
    return result;
}

EditNetSession::EditNetSession(const EditNet& model, EncodedCaption enc, VisualFeatures vis)
    : model_(model),
      enc_(std::move(enc)),
      vis_(std::move(vis)),
      state_(EditNetState::zero(model.config().hidden_dim)) {}

Tensor EditNetSession::step(int64_t prev_token) {
    EditNet::StepResult result = model_.step(state_, prev_token,
                                             model_.config().use_visual ? &vis_ : nullptr, enc_);
    state_ = result.state;
    trace_ = result.trace;
    return softmax(result.logits);
}

void EditNetSession::reset() { state_ = EditNetState::zero(model_.config().hidden_dim); }

DcnetSession::DcnetSession(const Dcnet& model, Dcnet::Encoded enc)
    : model_(model), enc_(std::move(enc)), state_(EditNetState::zero(model.config().hidden_dim)) {}

Tensor DcnetSession::step(int64_t prev_token) {
    Dcnet::StepResult result = model_.step(state_, prev_token, enc_);
    state_ = result.state;
    return softmax(result.logits);
}

void DcnetSession::reset() { state_ = EditNetState::zero(model_.config().hidden_dim); }

std::string format_alignment(std::span<const AlignmentRow> rows) {
    std::ostringstream out;
    for (const AlignmentRow& row : rows) {
        out << row.step << '\t' << row.emitted_word << '\t' << row.argmax_input_word << '\t'
            << row.alpha_max << '\t' << row.copy_gate_mean << '\n';
    }
    return out.str();
}

}  // namespace editseq
