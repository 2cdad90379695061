#pragma once

#include <cstdint>
#include <vector>

#include "modnet/config.hpp"
#include "modnet/tape.hpp"

namespace modnet {

// Concrete tensor shapes for one model instance (config plus dataset dims,
// with the 0-valued config dimensions resolved).
struct ModelShape {
    int vocab_size{0};
    int n_relations{0};
    int d_node{0};
    int d_emb{0};
    int d_hidden{0};
    int d_key{0};
    int d_value{0};
    int d_rel{0};
    int d_rel_out{0};
    int d_a{0};
    int n_units{0};

    static ModelShape derive(const InferenceConfig& cfg, int vocab_size, int n_relations, int d_node);
};

// One gated recurrent cell: update/reset/candidate gates, each with an input
// map, a recurrent map and a bias.
struct GruParamSet {
    Param W_z, U_z, b_z;
    Param W_r, U_r, b_r;
    Param W_c, U_c, b_c;
};

// Every learned tensor of the model, each with a gradient slot. Units share
// nothing: per-unit weights are independent tensors.
struct ModelParams {
    ModelShape shape;

    Param embed;         // vocab_size x d_emb token embeddings
    GruParamSet encoder;  // question encoder cell (input d_emb)

    Param W_read, b_read;  // memory read attention, d_hidden -> d_node

    Param W_e, b_e;              // shared input keys, d_node -> d_key
    Param W_v, b_v;              // shared input values, d_node -> d_value
    std::vector<Param> W_q, b_q;  // per-unit queries, d_hidden -> d_key

    std::vector<GruParamSet> unit;  // per-unit dynamics (input d_value)

    std::vector<Param> Wq_c, bq_c;  // communication queries, d_hidden -> d_key
    std::vector<Param> We_c, be_c;  // communication keys, d_hidden -> d_key
    std::vector<Param> Wv_c, bv_c;  // communication values, d_hidden -> d_hidden

    Param rel_table;  // n_relations x d_rel relation embeddings

    Param W_v_R, W_h_R, b_red;   // reduction MLP
    Param W_alpha_R, b_alpha;    // reduction score head, d_a -> 1
    Param W_rel, b_rel;          // (d_node + d_rel) -> d_rel_out
    Param W_v_rel, b_v_rel;      // (d_node + d_rel_out + d_hidden) -> d_node

    Param W_gate, b_gate;  // (d_hidden + d_node) -> (d_hidden + d_node)
    Param W_rep, b_rep;    // (d_hidden + d_node) -> d_node
    Param w_cls, b_cls;    // d_node -> 1

    // Xavier-uniform weights (+-sqrt(6 / (fan_in + fan_out))), zero biases.
    static ModelParams init(const ModelShape& shape, std::uint64_t seed);

    // Every parameter in a fixed registration order; the order defines the
    // optimizer-state and checkpoint layouts.
    std::vector<Param*> all();
    std::vector<const Param*> all() const;
    void zero_grads();
    std::size_t count_scalars() const;
};

}  // namespace modnet
