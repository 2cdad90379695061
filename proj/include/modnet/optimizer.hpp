#pragma once

#include <cstdint>
#include <vector>

#include "modnet/params.hpp"

namespace modnet {

// Warm-up: linear ramp from warmup_factor * lr to lr over warmup_epochs,
// constant lr afterwards.
double lr_schedule(int epoch, const TrainConfig& cfg);

// First/second gradient moments aligned with ModelParams::all() order.
struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    std::int64_t step{0};

    static AdamState init(const ModelParams& params);
};

// One bias-corrected Adam update from the gradients currently held in the
// parameters' grad slots.
void adam_step(ModelParams& params, AdamState& state, const TrainConfig& cfg, double lr);

}  // namespace modnet
