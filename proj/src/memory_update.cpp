#include "modnet/memory_update.hpp"

namespace modnet {

void reduce_memory(Tape& tape, ModelParams& params, GraphState& gs, Var h_state, const InferenceConfig& cfg) {
    const int d_node = gs.sample->d_node;
    Var zero_row = tape.zeros(1, d_node);
    Var h_term = tape.matmul(h_state, tape.leaf(params.W_h_R));

    for (Var& feat : gs.feats) {
        // [content row; zero row], scored by the guided MLP, two-way softmax
        // over the rows; the zero row contributes nothing to the blend.
        Var v_hat = tape.concat_rows({feat, zero_row});
        Var pre = tape.add(tape.matmul(v_hat, tape.leaf(params.W_v_R)), h_term);
        if (cfg.use_bias) pre = tape.add(pre, tape.leaf(params.b_red));
        pre = tape.tanh(pre);
        Var scores = tape.matmul(pre, tape.leaf(params.W_alpha_R));
        if (cfg.use_bias) scores = tape.add(scores, tape.leaf(params.b_alpha));
        Var alpha = tape.softmax_rows(tape.transpose(scores));
        feat = tape.matmul(alpha, v_hat);
    }
}

Var aggregate_relations(Tape& tape, ModelParams& params, const GraphState& gs, int node_id,
                        const InferenceConfig& cfg) {
    const MemoryGraph& g = gs.sample->graph;
    const std::vector<std::pair<int, int>> incoming = neighbors_in(g, node_id);
    if (incoming.empty()) return tape.zeros(1, params.shape.d_rel_out);

    Var rel_table = tape.leaf(params.rel_table);
    Var acc{};
    for (const auto& [src_id, relation_id] : incoming) {
        Var neighbor = gs.feats[static_cast<std::size_t>(g.node_pos(src_id))];
        Var rel_emb = tape.select_row(rel_table, relation_id);
        Var term = tape.matmul(tape.concat_cols({neighbor, rel_emb}), tape.leaf(params.W_rel));
        if (cfg.use_bias) term = tape.add(term, tape.leaf(params.b_rel));
        acc = acc.valid() ? tape.add(acc, term) : term;
    }
    return acc;
}

void update_memory(Tape& tape, ModelParams& params, GraphState& gs, Var h_state, const InferenceConfig& cfg) {
    const MemoryGraph& g = gs.sample->graph;
    // All relation sums come from the pre-update snapshot; nodes swap in
    // their new features only after every one is computed.
    std::vector<Var> next;
    next.reserve(gs.feats.size());
    for (std::size_t i = 0; i < gs.feats.size(); ++i) {
        Var rel = aggregate_relations(tape, params, gs, g.nodes[i].id, cfg);
        Var packed = tape.concat_cols({gs.feats[i], rel, h_state});
        Var fresh = tape.matmul(packed, tape.leaf(params.W_v_rel));
        if (cfg.use_bias) fresh = tape.add(fresh, tape.leaf(params.b_v_rel));
        if (cfg.update_tanh) fresh = tape.tanh(fresh);
        next.push_back(fresh);
    }
    gs.feats = std::move(next);
}

}  // namespace modnet
