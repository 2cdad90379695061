#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "modnet/matrix.hpp"

namespace modnet {

// The three memory layers.
enum class LayerTag { visual = 0, semantic = 1, fact = 2 };

const char* layer_name(LayerTag tag);
LayerTag layer_from_name(const std::string& name);

struct GraphNode {
    int id{0};
    LayerTag layer{LayerTag::visual};
    std::vector<double> features;  // dimension d_node
};

// Directed edge src -> dst carrying an index into the relation embedding table.
struct GraphEdge {
    int src{0};
    int dst{0};
    int relation_id{0};
};

// Layered heterogeneous memory graph. Nodes are kept in ascending id order
// and edges in ascending (src, dst, relation_id) order after construction.
struct MemoryGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;

    // Sorts nodes/edges canonically and rebuilds the id index. Call after any
    // direct mutation of nodes/edges.
    void freeze();

    int node_pos(int id) const;  // -1 if unknown
    const GraphNode& node(int id) const;
    std::vector<int> layer_positions(LayerTag tag) const;
    std::vector<int> fact_ids() const;

private:
    std::vector<std::pair<int, int>> id_index_;  // (id, position), sorted
};

// Incoming 1-hop neighbors of node `id`: all (src id, relation_id) with an
// edge src -> id, in ascending (src, relation_id) order.
std::vector<std::pair<int, int>> neighbors_in(const MemoryGraph& g, int id);

// One question: a memory graph, a token sequence, and binary labels over the
// fact nodes (in ascending fact-node id order).
struct TaskSample {
    int d_node{0};
    MemoryGraph graph;
    std::vector<int> question;
    std::vector<int> labels;
};

struct DatasetMeta {
    int vocab_size{0};
    int n_relations{0};
};

// Structured invariant violation; empty list means the sample is valid.
struct Violation {
    std::string rule;
    std::string detail;
};

std::vector<Violation> validate(const TaskSample& s, const DatasetMeta* meta = nullptr);

// Parses one sample document. Throws DataError with a byte offset on syntax
// errors and with the offending field/node/edge on schema violations.
TaskSample parse_sample(const std::string& text);

// Canonical serialization: keys sorted, nodes and edges in id order, reals
// with 17 significant digits. Byte-stable: equal samples serialize equally.
std::string serialize_sample(const TaskSample& s);

// Synthetic task generator configuration.
struct SynthConfig {
    int n_visual{4};
    int n_semantic{4};
    int n_fact{4};
    int d_node{12};
    int vocab_size{8};
    int n_relations{4};
    int question_len{3};
    double noise_sigma{0.1};
    std::uint64_t seed{1};

    void check() const;  // throws DataError on an invalid configuration
};

// Generator bookkeeping exposed for test oracles: which latent concept each
// fact node carries and which fact node answers the question.
struct SynthLatent {
    std::vector<int> fact_concepts;  // concept table index per fact node, id order
    int answer_pos{0};               // index into fact nodes (id order)
    int answer_fact_id{0};
    int answer_concept{0};  // concept table index encoded by the question
};

struct SynthOutput {
    std::vector<TaskSample> samples;
    std::vector<SynthLatent> latents;
    Matrix concept_table;  // vocab_size x d_node, shared by all samples
    DatasetMeta meta;
};

// Deterministic in cfg (including seed). Every sample validates cleanly and
// is solvable: the answer fact node is recoverable from the question tokens
// plus the latent concept table.
SynthOutput generate_synthetic(const SynthConfig& cfg, int n_samples);

// Dataset directory IO: one canonical JSON file per sample plus meta.json.
void write_dataset(const std::string& dir, const std::vector<TaskSample>& samples, const DatasetMeta& meta);
std::pair<std::vector<TaskSample>, DatasetMeta> load_dataset(const std::string& dir);

}  // namespace modnet
