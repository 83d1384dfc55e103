#include "editseq/objectives.hpp"

#include <cmath>
#include <stdexcept>

#include "editseq/corpus.hpp"

namespace editseq {

Tensor xe_loss(std::span<const Tensor> step_distributions, std::span<const int64_t> targets) {
    if (step_distributions.size() != targets.size()) {
        throw std::invalid_argument("xe_loss: " + std::to_string(step_distributions.size()) +
                                    " distributions vs " + std::to_string(targets.size()) +
                                    " targets");
    }
    Tensor acc;
    for (size_t t = 0; t < targets.size(); ++t) {
        int64_t target = targets[t];
        if (target == Vocab::kPad) continue;
        const Tensor& dist = step_distributions[t];
        if (target < 0 || target >= dist.size()) {
            throw std::invalid_argument("xe_loss: target id " + std::to_string(target) +
                                        " out of range for distribution of size " +
                                        std::to_string(dist.size()));
        }
        Tensor log_p = log(slice(dist, target, 1));
        acc = acc.defined() ? add(acc, log_p) : log_p;
    }
    if (!acc.defined()) return Tensor::scalar(0.0);
    return mul(acc, -1.0);
}

Tensor hidden_mse_loss(const Tensor& decoder_hidden, const Tensor& target_hidden,
                       const Tensor& w_proj, const Tensor& b_proj) {
    Tensor projected = add(matmul(w_proj, decoder_hidden), b_proj);
    if (projected.shape() != target_hidden.shape()) {
        throw std::invalid_argument("hidden_mse_loss: projected shape " +
                                    shape_str(projected.shape()) + " vs target " +
                                    shape_str(target_hidden.shape()));
    }
    return mean(squared_difference(projected, stop_gradient(target_hidden)));
}

Tensor combined_loss(const Tensor& xe, const Tensor& mse) {
    if (!std::isfinite(xe.item()) || !std::isfinite(mse.item())) {
        throw std::invalid_argument("combined_loss: non-finite component");
    }
    return add(xe, mse);
}

Tensor scst_loss(const Tensor& sampled_log_prob_sum, double reward_sampled, double reward_greedy) {
    if (!std::isfinite(reward_sampled) || !std::isfinite(reward_greedy)) {
        throw std::invalid_argument("scst_loss: non-finite reward");
    }
    return mul(sampled_log_prob_sum, -(reward_sampled - reward_greedy));
}

Adam::Adam(std::vector<NamedTensor> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    slots_.reserve(params_.size());
    for (const NamedTensor& p : params_) {
        Slot slot;
        slot.m.assign(static_cast<size_t>(p.tensor.size()), 0.0);
        slot.v.assign(static_cast<size_t>(p.tensor.size()), 0.0);
        slots_.push_back(std::move(slot));
    }
}

void Adam::step(double lr) {
    ++step_count_;
    double bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    double bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (size_t i = 0; i < params_.size(); ++i) {
        NamedTensor& p = params_[i];
        auto grad = p.tensor.grad();
        if (grad.empty()) continue;
        for (double g : grad) {
            if (!std::isfinite(g)) {
                throw std::runtime_error("adam: non-finite gradient for parameter " + p.name);
            }
        }
        auto values = p.tensor.mutable_values();
        Slot& slot = slots_[i];
        for (size_t j = 0; j < values.size(); ++j) {
            slot.m[j] = cfg_.beta1 * slot.m[j] + (1.0 - cfg_.beta1) * grad[j];
            slot.v[j] = cfg_.beta2 * slot.v[j] + (1.0 - cfg_.beta2) * grad[j] * grad[j];
            double m_hat = slot.m[j] / bias1;
            double v_hat = slot.v[j] / bias2;
            values[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
        }
    }
}

void Adam::zero_grad() {
    for (NamedTensor& p : params_) p.tensor.zero_grad();
}

void Adam::restore(std::vector<Slot> slots, int64_t step_count) {
    if (slots.size() != params_.size()) {
        throw std::invalid_argument("adam restore: slot count mismatch");
    }
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].m.size() != static_cast<size_t>(params_[i].tensor.size()) ||
            slots[i].v.size() != static_cast<size_t>(params_[i].tensor.size())) {
            throw std::invalid_argument("adam restore: slot shape mismatch for " + params_[i].name);
        }
    }
    slots_ = std::move(slots);
    step_count_ = step_count;
}

ScheduleAt schedule_at(int epoch, const TrainingSchedule& schedule) {
    if (epoch < 0) throw std::invalid_argument("schedule_at: epoch must be >= 0");
    ScheduleAt at;
    at.lr = schedule.base_lr *
            std::pow(schedule.decay_factor, static_cast<double>(epoch / schedule.decay_every_epochs));
    at.ss_prob = std::min(1.0, schedule.ss_increment *
                                   static_cast<double>(epoch / schedule.ss_every_epochs));
    return at;
}

}  // namespace editseq
