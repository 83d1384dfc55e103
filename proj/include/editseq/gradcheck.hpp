#pragma once

#include <functional>
#include <string>
#include <vector>

#include "editseq/autodiff.hpp"

namespace editseq {

struct GradCheckCase {
    std::string name;
    std::function<FdProbe()> fn;
    std::vector<Tensor> params;
};

struct GradCheckItem {
    std::string name;
    FdReport report;
};

struct GradCheckReport {
    std::vector<GradCheckItem> items;
    double max_error = 0.0;
    int64_t total_skipped = 0;
    bool passed(double threshold) const { return max_error < threshold; }
};

GradCheckReport run_gradcheck(std::span<const GradCheckCase> cases, double eps);

// The standard battery: both cells, additive/visual attention, the hard
// memory selection (frozen-mask surrogate with argmax-stable skipping), the
// context gate, and full teacher-forced editor/denoiser losses on a tiny
// configuration. Check losses carry a small constant scale so the 64-bit
// central-difference noise stays below threshold for near-zero-gradient
// coordinates.
std::vector<GradCheckCase> standard_gradcheck_cases(uint64_t seed);

}  // namespace editseq
