#include "modnet/model.hpp"

#include "modnet/errors.hpp"

namespace modnet {

ForwardResult run_sample(Tape& tape, ModelParams& params, const TaskSample& sample, const InferenceConfig& cfg_in,
                         const LossConfig& loss_cfg, const ForwardOptions& opts) {
    const InferenceConfig cfg = cfg_in.normalized();
    if (sample.d_node != params.shape.d_node) {
        throw DataError("run_sample: sample d_node " + std::to_string(sample.d_node) +
                        " does not match model d_node " + std::to_string(params.shape.d_node));
    }

    GraphState gs = make_graph_state(tape, sample);
    Var question = encode_question(tape, params, sample.question, cfg);
    UnitBank bank = init_units(tape, question, cfg);

    ForwardResult out;
    const int total_steps = cfg.n_steps + opts.zero_tail;
    for (int t = 0; t < total_steps; ++t) {
        StepOptions step;
        step.force_zero_input = t >= cfg.n_steps;
        std::vector<int> forced;
        if (opts.forced_active) {
            forced = opts.forced_active->at(static_cast<std::size_t>(t));
            step.forced_active = &forced;
        }
        StepTrace row = inference_step(tape, params, gs, bank, t, cfg, step);
        out.active_sets.push_back(row.active);
        out.trace.push_back(std::move(row));
    }

    Var h_final = global_state(tape, bank);
    out.fact_ids = sample.graph.fact_ids();
    std::vector<Var> fact_feats;
    fact_feats.reserve(out.fact_ids.size());
    for (int id : out.fact_ids) {
        fact_feats.push_back(gs.feats[static_cast<std::size_t>(sample.graph.node_pos(id))]);
    }

    std::vector<Var> fused = gate_fuse(tape, params, h_final, fact_feats, cfg);
    std::vector<Var> probs = score_facts(tape, params, fused, cfg);
    out.probs.reserve(probs.size());
    for (Var p : probs) out.probs.push_back(tape.scalar(p));
    out.predicted_id = predict_answer(out.probs, out.fact_ids);

    if (opts.want_loss) {
        out.loss = wbce_loss(tape, probs, sample.labels, loss_cfg);
        out.loss_value = tape.scalar(out.loss);
    }
    return out;
}

}  // namespace modnet
