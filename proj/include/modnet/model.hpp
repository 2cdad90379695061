#pragma once

#include "modnet/core.hpp"
#include "modnet/predictor.hpp"

namespace modnet {

struct ForwardOptions {
    int zero_tail{0};  // extra steps with the memory read forced to zero
    bool want_loss{true};
    // Per-step active sets overriding routing; holds selection fixed while
    // parameters are perturbed (gradient checking).
    const std::vector<std::vector<int>>* forced_active{nullptr};
};

struct ForwardResult {
    Var loss{};  // invalid when want_loss is false
    double loss_value{0.0};
    std::vector<int> fact_ids;       // ascending
    std::vector<double> probs;       // aligned with fact_ids
    int predicted_id{-1};
    std::vector<std::vector<int>> active_sets;  // per step
    std::vector<StepTrace> trace;
};

// Full forward pass over one sample: encode the question, run
// n_steps (+ zero_tail) reasoning steps, score the fact nodes, and (when
// labels are wanted) build the weighted BCE loss on the tape.
ForwardResult run_sample(Tape& tape, ModelParams& params, const TaskSample& sample, const InferenceConfig& cfg,
                         const LossConfig& loss_cfg, const ForwardOptions& opts = {});

}  // namespace modnet
