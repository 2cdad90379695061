#pragma once

#include "modnet/core.hpp"

namespace modnet {

// Gated fusion of the inference state with each fact node (one fused vector
// per fact node, in ascending fact-node id order).
std::vector<Var> gate_fuse(Tape& tape, ModelParams& params, Var h_state, const std::vector<Var>& fact_feats,
                           const InferenceConfig& cfg);

// Per-node answer probability in (0,1): sigmoid of a linear map, independent
// across nodes.
std::vector<Var> score_facts(Tape& tape, ModelParams& params, const std::vector<Var>& fused,
                             const InferenceConfig& cfg);

// Class-weighted binary cross-entropy summed over fact nodes; probabilities
// are clamped to [1e-7, 1 - 1e-7] before the logs.
Var wbce_loss(Tape& tape, const std::vector<Var>& probs, const std::vector<int>& labels, const LossConfig& cfg);

// Argmax over fact-node probabilities; ties resolve to the lowest node id.
int predict_answer(const std::vector<double>& probs, const std::vector<int>& fact_ids);

}  // namespace modnet
