#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "editseq/dcnet.hpp"
#include "editseq/editnet.hpp"

namespace editseq {

// Equal-weight mixture of two probability vectors; both must sum to one
// within 1e-9.
Tensor fuse_distributions(const Tensor& p_edit, const Tensor& p_dc);

// Maps the previous token to the next-token distribution, advancing
// whatever state the callable closes over.
using StepFn = std::function<Tensor(int64_t prev_token)>;

struct DecodeResult {
    std::vector<int64_t> tokens;  // emitted ids, end token excluded
};

// Argmax decoding; stops at the end token or max_len. Deterministic.
DecodeResult greedy_decode(const StepFn& step, int64_t max_len);

struct SampleResult {
    std::vector<int64_t> tokens;          // sampled ids, end token excluded
    std::vector<Tensor> step_log_probs;   // log-probability of each sampled
                                          // token, end token included
};

// Multinomial sampling from each step distribution; the log-probability
// terms stay attached to the graph for the policy-gradient surrogate.
SampleResult sample_decode(const StepFn& step, int64_t max_len, Rng& rng);

// Stateful per-example decoding context over an immutable editor.
class EditNetSession {
public:
    EditNetSession(const EditNet& model, EncodedCaption enc, VisualFeatures vis);

    Tensor step(int64_t prev_token);  // softmax over the vocabulary
    const EditNet::StepTrace& last_trace() const { return trace_; }
    void reset();

private:
    const EditNet& model_;
    EncodedCaption enc_;
    VisualFeatures vis_;
    EditNetState state_;
    EditNet::StepTrace trace_;
};

class DcnetSession {
public:
    DcnetSession(const Dcnet& model, Dcnet::Encoded enc);

    Tensor step(int64_t prev_token);
    void reset();

private:
    const Dcnet& model_;
    Dcnet::Encoded enc_;
    EditNetState state_;
};

// One line per decode step:
// step<TAB>emitted_word<TAB>argmax_input_word<TAB>alpha_max<TAB>copy_gate_mean
struct AlignmentRow {
    int64_t step = 0;
    std::string emitted_word;
    std::string argmax_input_word;
    double alpha_max = 0.0;
    double copy_gate_mean = 0.0;
};
std::string format_alignment(std::span<const AlignmentRow> rows);

}  // namespace editseq
