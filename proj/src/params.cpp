#include "modnet/params.hpp"

#include <cmath>
#include <string>

#include "modnet/errors.hpp"
#include "modnet/rng.hpp"

namespace modnet {

ModelShape ModelShape::derive(const InferenceConfig& cfg, int vocab_size, int n_relations, int d_node) {
    cfg.validate();
    const InferenceConfig c = cfg.normalized();
    if (vocab_size < 1 || n_relations < 1 || d_node < 1) {
        throw DataError("model shape: vocab_size, n_relations and d_node must be >= 1");
    }
    ModelShape s;
    s.vocab_size = vocab_size;
    s.n_relations = n_relations;
    s.d_node = d_node;
    s.d_hidden = c.d_hidden;
    s.d_key = c.d_key;
    s.d_value = c.d_value;
    s.d_emb = c.d_emb > 0 ? c.d_emb : c.d_hidden;
    s.d_rel = c.d_rel;
    s.d_rel_out = c.d_rel_out > 0 ? c.d_rel_out : d_node;
    s.d_a = c.d_a > 0 ? c.d_a : c.d_hidden;
    s.n_units = c.n_units;
    return s;
}

namespace {

Param make_weight(Rng& rng, const std::string& name, int rows, int cols) {
    Matrix m(rows, cols);
    const double bound = std::sqrt(6.0 / (rows + cols));
    for (double& v : m.data) v = rng.uniform(-bound, bound);
    return Param(name, std::move(m));
}

Param make_bias(const std::string& name, int cols) { return Param(name, Matrix::zeros(1, cols)); }

GruParamSet make_gru(Rng& rng, const std::string& prefix, int d_in, int d_hidden) {
    GruParamSet g;
    g.W_z = make_weight(rng, prefix + ".W_z", d_in, d_hidden);
    g.U_z = make_weight(rng, prefix + ".U_z", d_hidden, d_hidden);
    g.b_z = make_bias(prefix + ".b_z", d_hidden);
    g.W_r = make_weight(rng, prefix + ".W_r", d_in, d_hidden);
    g.U_r = make_weight(rng, prefix + ".U_r", d_hidden, d_hidden);
    g.b_r = make_bias(prefix + ".b_r", d_hidden);
    g.W_c = make_weight(rng, prefix + ".W_c", d_in, d_hidden);
    g.U_c = make_weight(rng, prefix + ".U_c", d_hidden, d_hidden);
    g.b_c = make_bias(prefix + ".b_c", d_hidden);
    return g;
}

void collect_gru(GruParamSet& g, std::vector<Param*>& out) {
    out.push_back(&g.W_z);
    out.push_back(&g.U_z);
    out.push_back(&g.b_z);
    out.push_back(&g.W_r);
    out.push_back(&g.U_r);
    out.push_back(&g.b_r);
    out.push_back(&g.W_c);
    out.push_back(&g.U_c);
    out.push_back(&g.b_c);
}

}  // namespace

ModelParams ModelParams::init(const ModelShape& shape, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x70617261));
    ModelParams p;
    p.shape = shape;

    p.embed = make_weight(rng, "embed", shape.vocab_size, shape.d_emb);
    p.encoder = make_gru(rng, "enc", shape.d_emb, shape.d_hidden);

    p.W_read = make_weight(rng, "read.W", shape.d_hidden, shape.d_node);
    p.b_read = make_bias("read.b", shape.d_node);

    p.W_e = make_weight(rng, "act.W_e", shape.d_node, shape.d_key);
    p.b_e = make_bias("act.b_e", shape.d_key);
    p.W_v = make_weight(rng, "act.W_v", shape.d_node, shape.d_value);
    p.b_v = make_bias("act.b_v", shape.d_value);
    for (int k = 0; k < shape.n_units; ++k) {
        const std::string id = std::to_string(k);
        p.W_q.push_back(make_weight(rng, "act.W_q." + id, shape.d_hidden, shape.d_key));
        p.b_q.push_back(make_bias("act.b_q." + id, shape.d_key));
    }

    for (int k = 0; k < shape.n_units; ++k) {
        p.unit.push_back(make_gru(rng, "unit." + std::to_string(k), shape.d_value, shape.d_hidden));
    }

    for (int k = 0; k < shape.n_units; ++k) {
        const std::string id = std::to_string(k);
        p.Wq_c.push_back(make_weight(rng, "comm.W_q." + id, shape.d_hidden, shape.d_key));
        p.bq_c.push_back(make_bias("comm.b_q." + id, shape.d_key));
        p.We_c.push_back(make_weight(rng, "comm.W_e." + id, shape.d_hidden, shape.d_key));
        p.be_c.push_back(make_bias("comm.b_e." + id, shape.d_key));
        p.Wv_c.push_back(make_weight(rng, "comm.W_v." + id, shape.d_hidden, shape.d_hidden));
        p.bv_c.push_back(make_bias("comm.b_v." + id, shape.d_hidden));
    }

    p.rel_table = make_weight(rng, "rel_table", shape.n_relations, shape.d_rel);

    p.W_v_R = make_weight(rng, "red.W_v", shape.d_node, shape.d_a);
    p.W_h_R = make_weight(rng, "red.W_h", shape.d_hidden, shape.d_a);
    p.b_red = make_bias("red.b", shape.d_a);
    p.W_alpha_R = make_weight(rng, "red.W_alpha", shape.d_a, 1);
    p.b_alpha = make_bias("red.b_alpha", 1);

    p.W_rel = make_weight(rng, "upd.W_rel", shape.d_node + shape.d_rel, shape.d_rel_out);
    p.b_rel = make_bias("upd.b_rel", shape.d_rel_out);
    p.W_v_rel = make_weight(rng, "upd.W_v_rel", shape.d_node + shape.d_rel_out + shape.d_hidden, shape.d_node);
    p.b_v_rel = make_bias("upd.b_v_rel", shape.d_node);

    p.W_gate = make_weight(rng, "pred.W_gate", shape.d_hidden + shape.d_node, shape.d_hidden + shape.d_node);
    p.b_gate = make_bias("pred.b_gate", shape.d_hidden + shape.d_node);
    p.W_rep = make_weight(rng, "pred.W_rep", shape.d_hidden + shape.d_node, shape.d_node);
    p.b_rep = make_bias("pred.b_rep", shape.d_node);
    p.w_cls = make_weight(rng, "pred.w_cls", shape.d_node, 1);
    p.b_cls = make_bias("pred.b_cls", 1);

    return p;
}

std::vector<Param*> ModelParams::all() {
    std::vector<Param*> out;
    out.push_back(&embed);
    collect_gru(encoder, out);
    out.push_back(&W_read);
    out.push_back(&b_read);
    out.push_back(&W_e);
    out.push_back(&b_e);
    out.push_back(&W_v);
    out.push_back(&b_v);
    for (std::size_t k = 0; k < W_q.size(); ++k) {
        out.push_back(&W_q[k]);
        out.push_back(&b_q[k]);
    }
    for (GruParamSet& g : unit) collect_gru(g, out);
    for (std::size_t k = 0; k < Wq_c.size(); ++k) {
        out.push_back(&Wq_c[k]);
        out.push_back(&bq_c[k]);
        out.push_back(&We_c[k]);
        out.push_back(&be_c[k]);
        out.push_back(&Wv_c[k]);
        out.push_back(&bv_c[k]);
    }
    out.push_back(&rel_table);
    out.push_back(&W_v_R);
    out.push_back(&W_h_R);
    out.push_back(&b_red);
    out.push_back(&W_alpha_R);
    out.push_back(&b_alpha);
    out.push_back(&W_rel);
    out.push_back(&b_rel);
    out.push_back(&W_v_rel);
    out.push_back(&b_v_rel);
    out.push_back(&W_gate);
    out.push_back(&b_gate);
    out.push_back(&W_rep);
    out.push_back(&b_rep);
    out.push_back(&w_cls);
    out.push_back(&b_cls);
    return out;
}

std::vector<const Param*> ModelParams::all() const {
    std::vector<Param*> mut = const_cast<ModelParams*>(this)->all();
    return std::vector<const Param*>(mut.begin(), mut.end());
}

void ModelParams::zero_grads() {
    for (Param* p : all()) p->zero_grad();
}

std::size_t ModelParams::count_scalars() const {
    std::size_t n = 0;
    for (const Param* p : all()) n += static_cast<std::size_t>(p->value.size());
    return n;
}

}  // namespace modnet
