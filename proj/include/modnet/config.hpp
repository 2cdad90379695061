#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modnet/graph.hpp"

namespace modnet {

// Reasoning-engine configuration. Dimensions given as 0 are derived at model
// build time: d_emb -> d_hidden, d_rel_out -> d_node, d_a -> d_hidden.
struct InferenceConfig {
    int n_units{8};
    int k_active{4};
    int n_steps{20};
    int d_hidden{16};
    int d_key{16};
    int d_value{16};
    int d_emb{0};
    int d_rel{8};
    int d_rel_out{0};
    int d_a{0};
    std::vector<LayerTag> modality_schedule{LayerTag::visual, LayerTag::semantic, LayerTag::fact};
    bool disable_communication{false};
    bool disable_memory_update{false};
    bool single_unit_mode{false};
    bool use_bias{true};
    bool update_tanh{false};

    // single_unit_mode collapses the bank to one always-active unit.
    InferenceConfig normalized() const;
    void validate() const;
};

struct LossConfig {
    double a{0.7};  // positive-class weight
    double b{0.3};  // negative-class weight
};

struct TrainConfig {
    int epochs{30};
    int batch_size{32};
    double lr{1e-3};
    int warmup_epochs{2};
    double warmup_factor{0.2};
    double beta1{0.9};
    double beta2{0.999};
    double adam_eps{1e-8};
    std::uint64_t seed{1};
    // Stop once training accuracy reaches this level; > 1 never triggers.
    double stop_at_train_acc{2.0};
    InferenceConfig inference;
    LossConfig loss;
    std::optional<SynthConfig> synth;
    std::string data_path;

    void validate() const;
};

TrainConfig load_train_config(const std::string& path);
TrainConfig parse_train_config(const std::string& text);
std::string dump_train_config(const TrainConfig& cfg);

// Canonical JSON of the pieces that shape the learned tensors; hashed into
// checkpoints so a checkpoint can be matched against a configuration.
std::string model_signature(const InferenceConfig& inf, const LossConfig& loss, int vocab_size, int n_relations,
                            int d_node);
std::uint64_t fnv1a64(const std::string& text);

}  // namespace modnet
