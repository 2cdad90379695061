#pragma once

#include <vector>

#include "modnet/config.hpp"
#include "modnet/graph.hpp"
#include "modnet/params.hpp"

namespace modnet {

// Hidden states of all units plus the active set of the current step.
struct UnitBank {
    std::vector<Var> h;       // n_units states, 1 x d_hidden each
    std::vector<int> active;  // ascending unit indices, |active| = min(k_active, n_units)
};

// Mutable per-sample view of the memory graph: node features as tape values,
// indexed by node position (ascending id order).
struct GraphState {
    const TaskSample* sample{nullptr};
    std::vector<Var> feats;
};

GraphState make_graph_state(Tape& tape, const TaskSample& sample);

// Per-step instrumentation: which modality fed the step, every unit's
// attention mass on the real-input row, the active set, and the norm of the
// pooled state after the step.
struct StepTrace {
    int step{0};
    bool probed{false};         // true for forced-zero-input probe steps
    LayerTag modality{LayerTag::visual};
    std::vector<double> input_weight;  // per unit
    std::vector<int> active;
    double global_norm{0.0};
};

// Result of the activation stage. a_in holds attended inputs for active
// units only (empty Var elsewhere): inactive units never process input.
struct ActivationResult {
    std::vector<Var> a_in;
    std::vector<double> input_weight;
};

// Final encoder state over the token sequence, from a zero initial state.
Var encode_question(Tape& tape, ModelParams& params, const std::vector<int>& tokens, const InferenceConfig& cfg);

// Every unit starts from the question encoding; no unit is active yet.
UnitBank init_units(Tape& tape, Var question, const InferenceConfig& cfg);

// Mean of all unit states: the single inference-state vector consumed by the
// memory update and the predictor.
Var global_state(Tape& tape, const UnitBank& bank);

// Attention-pooled read over one layer's current node features.
Var read_memory(Tape& tape, ModelParams& params, const GraphState& gs, LayerTag layer, Var h_global,
                const InferenceConfig& cfg);

// Scores every unit against [null row; input row], fills bank.active with the
// top-k units by real-input attention mass, and attends inputs for them.
// `forced` overrides the selection (gradient checking holds routing fixed).
ActivationResult activate_units(Tape& tape, ModelParams& params, UnitBank& bank, Var input,
                                const InferenceConfig& cfg, const std::vector<int>* forced = nullptr);

// One gated-cell step per active unit; inactive entries stay invalid.
std::vector<Var> unit_dynamics(Tape& tape, ModelParams& params, const UnitBank& bank, const ActivationResult& act,
                               const InferenceConfig& cfg);

// Attention exchange across all units with a residual connection; inactive
// units carry their state forward unchanged. With disable_communication the
// active units keep their intermediate states as-is.
void communicate(Tape& tape, ModelParams& params, UnitBank& bank, const std::vector<Var>& h_hat,
                 const InferenceConfig& cfg);

struct StepOptions {
    bool force_zero_input{false};
    const std::vector<int>* forced_active{nullptr};
};

// One full reasoning step: read the scheduled modality, route, update the
// active units, exchange, then maintain the memory graph.
StepTrace inference_step(Tape& tape, ModelParams& params, GraphState& gs, UnitBank& bank, int t,
                         const InferenceConfig& cfg, const StepOptions& opts = {});

}  // namespace modnet
