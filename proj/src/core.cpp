#include "modnet/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "modnet/errors.hpp"
#include "modnet/memory_update.hpp"

namespace modnet {

namespace {

Var linear(Tape& t, Var x, Param& W, Param& b, bool use_bias) {
    Var y = t.matmul(x, t.leaf(W));
    if (use_bias) y = t.add(y, t.leaf(b));
    return y;
}

// z = sig(xW_z + hU_z + b_z); r = sig(xW_r + hU_r + b_r)
// c = tanh(xW_c + (r.h)U_c + b_c); h' = z.h + (1-z).c
Var gru_cell(Tape& t, GruParamSet& g, Var x, Var h, bool use_bias) {
    Var z = t.sigmoid(t.add(linear(t, x, g.W_z, g.b_z, use_bias), t.matmul(h, t.leaf(g.U_z))));
    Var r = t.sigmoid(t.add(linear(t, x, g.W_r, g.b_r, use_bias), t.matmul(h, t.leaf(g.U_r))));
    Var c = t.tanh(t.add(linear(t, x, g.W_c, g.b_c, use_bias), t.matmul(t.mul(r, h), t.leaf(g.U_c))));
    Var ones = t.ones(1, t.value(z).cols);
    return t.add(t.mul(z, h), t.mul(t.sub(ones, z), c));
}

}  // namespace

GraphState make_graph_state(Tape& tape, const TaskSample& sample) {
    GraphState gs;
    gs.sample = &sample;
    gs.feats.reserve(sample.graph.nodes.size());
    for (const GraphNode& n : sample.graph.nodes) {
        gs.feats.push_back(tape.constant(Matrix::row(n.features)));
    }
    return gs;
}

Var encode_question(Tape& tape, ModelParams& params, const std::vector<int>& tokens, const InferenceConfig& cfg) {
    if (tokens.empty()) throw DataError("encode_question: empty token sequence");
    Var embed = tape.leaf(params.embed);
    Var h = tape.zeros(1, params.shape.d_hidden);
    for (int tok : tokens) {
        if (tok < 0 || tok >= params.shape.vocab_size) {
            throw DataError("encode_question: token id " + std::to_string(tok) + " outside vocabulary of size " +
                            std::to_string(params.shape.vocab_size));
        }
        Var x = tape.select_row(embed, tok);
        h = gru_cell(tape, params.encoder, x, h, cfg.use_bias);
    }
    return h;
}

UnitBank init_units(Tape& tape, Var question, const InferenceConfig& cfg) {
    const Matrix& q = tape.value(question);
    if (q.rows != 1) throw std::invalid_argument("init_units: question state must be a row vector, got " + q.shape_str());
    UnitBank bank;
    bank.h.assign(static_cast<std::size_t>(cfg.n_units), question);
    return bank;
}

Var global_state(Tape& tape, const UnitBank& bank) {
    const int n = static_cast<int>(bank.h.size());
    Var stacked = tape.concat_rows(bank.h);
    Matrix pool(1, n);
    for (int i = 0; i < n; ++i) pool.at(0, i) = 1.0 / n;
    return tape.matmul(tape.constant(std::move(pool)), stacked);
}

Var read_memory(Tape& tape, ModelParams& params, const GraphState& gs, LayerTag layer, Var h_global,
                const InferenceConfig& cfg) {
    const std::vector<int> positions = gs.sample->graph.layer_positions(layer);
    if (positions.empty()) {
        throw DataError(std::string("read_memory: layer \"") + layer_name(layer) +
                        "\" has no nodes; adjust modality_schedule");
    }
    std::vector<Var> rows;
    rows.reserve(positions.size());
    for (int p : positions) rows.push_back(gs.feats[static_cast<std::size_t>(p)]);
    Var feats = tape.concat_rows(rows);

    Var key = linear(tape, h_global, params.W_read, params.b_read, cfg.use_bias);
    Var logits = tape.scale(tape.matmul(key, tape.transpose(feats)), 1.0 / std::sqrt(params.shape.d_key));
    Var attn = tape.softmax_rows(logits);
    return tape.matmul(attn, feats);
}

ActivationResult activate_units(Tape& tape, ModelParams& params, UnitBank& bank, Var input,
                                const InferenceConfig& cfg, const std::vector<int>* forced) {
    const int n_units = static_cast<int>(bank.h.size());
    const Matrix& m = tape.value(input);
    Var null_row = tape.zeros(1, m.cols);
    Var stacked = tape.concat_rows({null_row, input});

    Var keys = linear(tape, stacked, params.W_e, params.b_e, cfg.use_bias);
    Var values = linear(tape, stacked, params.W_v, params.b_v, cfg.use_bias);
    Var keys_t = tape.transpose(keys);
    const double inv_sqrt_d = 1.0 / std::sqrt(params.shape.d_key);

    ActivationResult out;
    out.a_in.assign(static_cast<std::size_t>(n_units), Var{});
    out.input_weight.reserve(static_cast<std::size_t>(n_units));
    std::vector<Var> attn;
    attn.reserve(static_cast<std::size_t>(n_units));
    for (int k = 0; k < n_units; ++k) {
        Var query = linear(tape, bank.h[static_cast<std::size_t>(k)], params.W_q[static_cast<std::size_t>(k)],
                           params.b_q[static_cast<std::size_t>(k)], cfg.use_bias);
        Var logits = tape.scale(tape.matmul(query, keys_t), inv_sqrt_d);
        Var w = tape.softmax_rows(logits);
        attn.push_back(w);
        out.input_weight.push_back(tape.value(w).at(0, 1));
    }

    const int k_active = std::min(cfg.k_active, n_units);
    if (forced) {
        bank.active = *forced;
        std::sort(bank.active.begin(), bank.active.end());
        for (int k : bank.active) {
            if (k < 0 || k >= n_units) throw std::invalid_argument("activate_units: forced unit out of range");
        }
    } else {
        bank.active = topk_indices(out.input_weight, k_active);
    }

    for (int k : bank.active) {
        out.a_in[static_cast<std::size_t>(k)] = tape.matmul(attn[static_cast<std::size_t>(k)], values);
    }
    return out;
}

std::vector<Var> unit_dynamics(Tape& tape, ModelParams& params, const UnitBank& bank, const ActivationResult& act,
                               const InferenceConfig& cfg) {
    std::vector<Var> h_hat(bank.h.size(), Var{});
    for (int k : bank.active) {
        const std::size_t ki = static_cast<std::size_t>(k);
        h_hat[ki] = gru_cell(tape, params.unit[ki], act.a_in[ki], bank.h[ki], cfg.use_bias);
    }
    return h_hat;
}

void communicate(Tape& tape, ModelParams& params, UnitBank& bank, const std::vector<Var>& h_hat,
                 const InferenceConfig& cfg) {
    if (cfg.disable_communication) {
        for (int k : bank.active) bank.h[static_cast<std::size_t>(k)] = h_hat[static_cast<std::size_t>(k)];
        return;
    }
    const int n_units = static_cast<int>(bank.h.size());
    std::vector<char> is_active(static_cast<std::size_t>(n_units), 0);
    for (int k : bank.active) is_active[static_cast<std::size_t>(k)] = 1;

    // Keys/values read every unit: the fresh state where one exists, the
    // carried state elsewhere.
    std::vector<Var> key_rows, value_rows;
    key_rows.reserve(static_cast<std::size_t>(n_units));
    value_rows.reserve(static_cast<std::size_t>(n_units));
    for (int k = 0; k < n_units; ++k) {
        const std::size_t ki = static_cast<std::size_t>(k);
        Var state = is_active[ki] ? h_hat[ki] : bank.h[ki];
        key_rows.push_back(linear(tape, state, params.We_c[ki], params.be_c[ki], cfg.use_bias));
        value_rows.push_back(linear(tape, state, params.Wv_c[ki], params.bv_c[ki], cfg.use_bias));
    }
    Var keys_t = tape.transpose(tape.concat_rows(key_rows));
    Var values = tape.concat_rows(value_rows);
    const double inv_sqrt_d = 1.0 / std::sqrt(params.shape.d_key);

    for (int k : bank.active) {
        const std::size_t ki = static_cast<std::size_t>(k);
        Var query = linear(tape, h_hat[ki], params.Wq_c[ki], params.bq_c[ki], cfg.use_bias);
        Var attn = tape.softmax_rows(tape.scale(tape.matmul(query, keys_t), inv_sqrt_d));
        bank.h[ki] = tape.add(tape.matmul(attn, values), h_hat[ki]);
    }
}

StepTrace inference_step(Tape& tape, ModelParams& params, GraphState& gs, UnitBank& bank, int t,
                         const InferenceConfig& cfg, const StepOptions& opts) {
    if (t < 0) throw std::invalid_argument("inference_step: negative step index");
    const LayerTag layer =
        cfg.modality_schedule[static_cast<std::size_t>(t) % cfg.modality_schedule.size()];

    Var input;
    if (opts.force_zero_input) {
        input = tape.zeros(1, gs.sample->d_node);
    } else {
        input = read_memory(tape, params, gs, layer, global_state(tape, bank), cfg);
    }

    ActivationResult act = activate_units(tape, params, bank, input, cfg, opts.forced_active);
    std::vector<Var> h_hat = unit_dynamics(tape, params, bank, act, cfg);
    communicate(tape, params, bank, h_hat, cfg);

    Var h_after = global_state(tape, bank);
    if (!cfg.disable_memory_update) {
        reduce_memory(tape, params, gs, h_after, cfg);
        update_memory(tape, params, gs, h_after, cfg);
    }

    StepTrace trace;
    trace.step = t;
    trace.probed = opts.force_zero_input;
    trace.modality = layer;
    trace.input_weight = act.input_weight;
    trace.active = bank.active;
    double sq = 0.0;
    for (double v : tape.value(h_after).data) sq += v * v;
    trace.global_norm = std::sqrt(sq);
    return trace;
}

}  // namespace modnet
