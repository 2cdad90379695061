#include "modnet/predictor.hpp"

#include <stdexcept>

namespace modnet {

std::vector<Var> gate_fuse(Tape& tape, ModelParams& params, Var h_state, const std::vector<Var>& fact_feats,
                           const InferenceConfig& cfg) {
    if (fact_feats.empty()) throw std::invalid_argument("gate_fuse: no fact nodes");
    std::vector<Var> fused;
    fused.reserve(fact_feats.size());
    for (Var feat : fact_feats) {
        Var packed = tape.concat_cols({h_state, feat});
        Var gate_pre = tape.matmul(packed, tape.leaf(params.W_gate));
        if (cfg.use_bias) gate_pre = tape.add(gate_pre, tape.leaf(params.b_gate));
        Var gate = tape.sigmoid(gate_pre);
        Var rep = tape.matmul(tape.mul(gate, packed), tape.leaf(params.W_rep));
        if (cfg.use_bias) rep = tape.add(rep, tape.leaf(params.b_rep));
        fused.push_back(rep);
    }
    return fused;
}

std::vector<Var> score_facts(Tape& tape, ModelParams& params, const std::vector<Var>& fused,
                             const InferenceConfig& cfg) {
    std::vector<Var> probs;
    probs.reserve(fused.size());
    for (Var f : fused) {
        Var logit = tape.matmul(f, tape.leaf(params.w_cls));
        if (cfg.use_bias) logit = tape.add(logit, tape.leaf(params.b_cls));
        probs.push_back(tape.sigmoid(logit));
    }
    return probs;
}

Var wbce_loss(Tape& tape, const std::vector<Var>& probs, const std::vector<int>& labels, const LossConfig& cfg) {
    if (probs.size() != labels.size()) {
        throw std::invalid_argument("wbce_loss: " + std::to_string(probs.size()) + " probabilities vs " +
                                    std::to_string(labels.size()) + " labels");
    }
    const int n = static_cast<int>(probs.size());
    Var y_hat = tape.clamp(tape.concat_cols(probs), 1e-7, 1.0 - 1e-7);

    Matrix pos(1, n), neg(1, n);
    for (int i = 0; i < n; ++i) {
        pos.at(0, i) = cfg.a * labels[static_cast<std::size_t>(i)];
        neg.at(0, i) = cfg.b * (1 - labels[static_cast<std::size_t>(i)]);
    }
    Var pos_term = tape.mul(tape.constant(std::move(pos)), tape.log(y_hat));
    Var neg_term = tape.mul(tape.constant(std::move(neg)), tape.log(tape.sub(tape.ones(1, n), y_hat)));
    return tape.scale(tape.sum(tape.add(pos_term, neg_term)), -1.0);
}

int predict_answer(const std::vector<double>& probs, const std::vector<int>& fact_ids) {
    if (probs.empty() || probs.size() != fact_ids.size()) {
        throw std::invalid_argument("predict_answer: need matching, non-empty probabilities and fact ids");
    }
    // fact_ids ascend, so the first strict maximum realizes the lowest-id
    // tie-break.
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    return fact_ids[best];
}

}  // namespace modnet
