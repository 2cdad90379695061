#pragma once

#include "modnet/core.hpp"

namespace modnet {

// Per-node erasure gate: each feature row competes with an appended zero row
// in a two-way softmax guided by the inference state, scaling the node into
// [0,1] of its previous value.
void reduce_memory(Tape& tape, ModelParams& params, GraphState& gs, Var h_state, const InferenceConfig& cfg);

// Sum over incoming edges of the transformed [neighbor features, relation
// embedding] concatenation; zero vector for an isolated node.
Var aggregate_relations(Tape& tape, ModelParams& params, const GraphState& gs, int node_id,
                        const InferenceConfig& cfg);

// Synchronous refresh of every node from [own features, aggregated
// relations, inference state]; all nodes read pre-update neighbor values.
// Expects reduce_memory() to have run earlier in the same step.
void update_memory(Tape& tape, ModelParams& params, GraphState& gs, Var h_state, const InferenceConfig& cfg);

}  // namespace modnet
