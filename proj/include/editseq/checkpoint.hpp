#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "editseq/model_types.hpp"
#include "editseq/objectives.hpp"

namespace editseq {

// Little-endian binary checkpoint: magic, version, model configuration,
// named tensors (row-major 64-bit values) and optional optimizer states.
// Round trips are bit-exact.
struct Checkpoint {
    static constexpr char kMagic[8] = {'E', 'D', 'I', 'T', 'S', 'E', 'Q', '1'};
    static constexpr uint32_t kVersion = 1;

    ModelConfig config;
    int64_t epoch = 0;

    struct Entry {
        std::string name;
        Shape shape;
        std::vector<double> values;
    };
    std::vector<Entry> tensors;

    struct OptimizerState {
        std::string name;
        int64_t step_count = 0;
        std::vector<Adam::Slot> slots;  // positional, matching `tensors` of that model
        std::vector<std::string> slot_names;
    };
    std::vector<OptimizerState> optimizers;

    const Entry* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

// Snapshot / restore named parameter lists.
void checkpoint_add_tensors(Checkpoint& checkpoint, const std::vector<NamedTensor>& params);
// Copies stored values into the existing tensors; every parameter must be
// present with a matching shape.
void checkpoint_restore_tensors(const Checkpoint& checkpoint,
                                const std::vector<NamedTensor>& params);

void checkpoint_add_optimizer(Checkpoint& checkpoint, const std::string& name, const Adam& adam);
// Restores optimizer state when present; returns false if the checkpoint
// carries no state under that name.
bool checkpoint_restore_optimizer(const Checkpoint& checkpoint, const std::string& name,
                                  Adam& adam);

}  // namespace editseq
