#pragma once

#include <span>
#include <string>
#include <vector>

#include "editseq/autodiff.hpp"

namespace editseq {

// Cross entropy -sum_t log p_t(target_t) over non-pad targets. Targets at
// the pad id contribute nothing.
Tensor xe_loss(std::span<const Tensor> step_distributions, std::span<const int64_t> targets);

// Mean squared difference between the linearly projected decoder hidden
// state and the (gradient-blocked) ground-truth encoder hidden state.
Tensor hidden_mse_loss(const Tensor& decoder_hidden, const Tensor& target_hidden,
                       const Tensor& w_proj, const Tensor& b_proj);

Tensor combined_loss(const Tensor& xe, const Tensor& mse);

// Policy-gradient surrogate -(r_sampled - r_greedy) * sum log p(sampled);
// rewards are constants, so backward reproduces the REINFORCE gradient with
// the greedy score as baseline.
Tensor scst_loss(const Tensor& sampled_log_prob_sum, double reward_sampled, double reward_greedy);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Standard bias-corrected Adam over a fixed parameter list.
class Adam {
public:
    explicit Adam(std::vector<NamedTensor> params, AdamConfig cfg = {});

    // Applies one update from the accumulated gradients; parameters with no
    // accumulated gradient are left untouched. Rejects non-finite gradients
    // naming the parameter.
    void step(double lr);
    void zero_grad();

    int64_t step_count() const { return step_count_; }
    const std::vector<NamedTensor>& params() const { return params_; }

    struct Slot {
        std::vector<double> m;
        std::vector<double> v;
    };
    std::span<const Slot> slots() const { return slots_; }
    // Restores serialized state; slot shapes must match the parameters.
    void restore(std::vector<Slot> slots, int64_t step_count);

private:
    std::vector<NamedTensor> params_;
    std::vector<Slot> slots_;
    AdamConfig cfg_;
    int64_t step_count_ = 0;
};

struct TrainingSchedule {
    double base_lr = 5e-4;
    double decay_factor = 0.8;
    int decay_every_epochs = 3;
    double ss_increment = 0.05;
    int ss_every_epochs = 5;
    double scst_lr = 5e-5;
    double scst_anneal = 0.5;
};

struct ScheduleAt {
    double lr = 0.0;
    double ss_prob = 0.0;
};

// lr = base * decay^floor(epoch/3); ss = min(1, 0.05 * floor(epoch/5)).
ScheduleAt schedule_at(int epoch, const TrainingSchedule& schedule);

}  // namespace editseq
