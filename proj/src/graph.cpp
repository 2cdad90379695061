#include "modnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "modnet/errors.hpp"
#include "modnet/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace modnet {

const char* layer_name(LayerTag tag) {
    switch (tag) {
        case LayerTag::visual: return "visual";
        case LayerTag::semantic: return "semantic";
        case LayerTag::fact: return "fact";
    }
    return "?";
}

LayerTag layer_from_name(const std::string& name) {
    if (name == "visual") return LayerTag::visual;
    if (name == "semantic") return LayerTag::semantic;
    if (name == "fact") return LayerTag::fact;
    throw DataError("unknown layer \"" + name + "\" (expected visual|semantic|fact)");
}

void MemoryGraph::freeze() {
    std::sort(nodes.begin(), nodes.end(), [](const GraphNode& a, const GraphNode& b) { return a.id < b.id; });
    std::sort(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
        if (a.src != b.src) return a.src < b.src;
        if (a.dst != b.dst) return a.dst < b.dst;
        return a.relation_id < b.relation_id;
    });
    id_index_.clear();
    id_index_.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) id_index_.emplace_back(nodes[i].id, static_cast<int>(i));
}

int MemoryGraph::node_pos(int id) const {
    auto it = std::lower_bound(id_index_.begin(), id_index_.end(), std::make_pair(id, -1));
    if (it == id_index_.end() || it->first != id) return -1;
    return it->second;
}

const GraphNode& MemoryGraph::node(int id) const {
    const int pos = node_pos(id);
    if (pos < 0) throw DataError("unknown node id " + std::to_string(id));
    return nodes[static_cast<std::size_t>(pos)];
}

std::vector<int> MemoryGraph::layer_positions(LayerTag tag) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].layer == tag) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> MemoryGraph::fact_ids() const {
    std::vector<int> out;
    for (const GraphNode& n : nodes) {
        if (n.layer == LayerTag::fact) out.push_back(n.id);
    }
    return out;
}

std::vector<std::pair<int, int>> neighbors_in(const MemoryGraph& g, int id) {
    if (g.node_pos(id) < 0) throw DataError("neighbors_in: unknown node id " + std::to_string(id));
    std::vector<std::pair<int, int>> out;
    for (const GraphEdge& e : g.edges) {
        if (e.dst == id) out.emplace_back(e.src, e.relation_id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Violation> validate(const TaskSample& s, const DatasetMeta* meta) {
    std::vector<Violation> out;
    auto flag = [&out](std::string rule, std::string detail) {
        out.push_back(Violation{std::move(rule), std::move(detail)});
    };

    if (s.d_node < 1) flag("d_node.positive", "d_node = " + std::to_string(s.d_node));

    std::set<int> ids;
    int fact_count = 0;
    for (const GraphNode& n : s.graph.nodes) {
        if (!ids.insert(n.id).second) flag("node.id.unique", "duplicate node id " + std::to_string(n.id));
        if (static_cast<int>(n.features.size()) != s.d_node) {
            flag("node.features.dim", "node " + std::to_string(n.id) + " has " + std::to_string(n.features.size()) +
                                          " features, expected " + std::to_string(s.d_node));
        }
        for (double v : n.features) {
            if (!std::isfinite(v)) {
                flag("node.features.finite", "node " + std::to_string(n.id) + " has a non-finite feature");
                break;
            }
        }
        if (n.layer == LayerTag::fact) ++fact_count;
    }
    if (fact_count == 0) flag("graph.fact_layer.nonempty", "no fact nodes");

    for (const GraphEdge& e : s.graph.edges) {
        const std::string tag = "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst);
        if (ids.find(e.src) == ids.end()) flag("edge.endpoint", tag + ": dangling endpoint " + std::to_string(e.src));
        if (ids.find(e.dst) == ids.end()) flag("edge.endpoint", tag + ": dangling endpoint " + std::to_string(e.dst));
        if (e.src == e.dst) flag("edge.no_self_loop", tag);
        if (e.relation_id < 0) flag("edge.relation_id", tag + ": negative relation_id");
        if (meta && e.relation_id >= meta->n_relations) {
            flag("edge.relation_id", tag + ": relation_id " + std::to_string(e.relation_id) + " >= n_relations " +
                                         std::to_string(meta->n_relations));
        }
    }

    if (static_cast<int>(s.labels.size()) != fact_count) {
        flag("labels.length", std::to_string(s.labels.size()) + " labels for " + std::to_string(fact_count) +
                                  " fact nodes");
    }
    for (int y : s.labels) {
        if (y != 0 && y != 1) {
            flag("labels.binary", "label value " + std::to_string(y));
            break;
        }
    }

    if (s.question.empty()) flag("question.nonempty", "empty question");
    for (int t : s.question) {
        if (t < 0) {
            flag("question.token", "negative token id " + std::to_string(t));
            break;
        }
        if (meta && t >= meta->vocab_size) {
            flag("question.token",
                 "token id " + std::to_string(t) + " >= vocab_size " + std::to_string(meta->vocab_size));
            break;
        }
    }
    return out;
}

namespace {

const json& require_field(const json& obj, const char* key, const char* where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw DataError(std::string("missing field \"") + key + "\" in " + where);
    return *it;
}

int require_int(const json& obj, const char* key, const char* where) {
    const json& v = require_field(obj, key, where);
    if (!v.is_number_integer()) throw DataError(std::string("field \"") + key + "\" in " + where + " is not an integer");
    return v.get<int>();
}

}  // namespace

TaskSample parse_sample(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError("JSON syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) throw DataError("sample document is not a JSON object");

    TaskSample s;
    s.d_node = require_int(doc, "d_node", "sample");

    const json& nodes = require_field(doc, "nodes", "sample");
    if (!nodes.is_array()) throw DataError("field \"nodes\" is not an array");
    for (const json& jn : nodes) {
        if (!jn.is_object()) throw DataError("entry of \"nodes\" is not an object");
        GraphNode n;
        n.id = require_int(jn, "id", "node");
        const json& jl = require_field(jn, "layer", "node");
        if (!jl.is_string()) throw DataError("field \"layer\" of node " + std::to_string(n.id) + " is not a string");
        n.layer = layer_from_name(jl.get<std::string>());
        const json& jf = require_field(jn, "features", "node");
        if (!jf.is_array()) throw DataError("field \"features\" of node " + std::to_string(n.id) + " is not an array");
        for (const json& jv : jf) {
            if (!jv.is_number()) {
                throw DataError("non-numeric feature in node " + std::to_string(n.id));
            }
            n.features.push_back(jv.get<double>());
        }
        s.graph.nodes.push_back(std::move(n));
    }

    const json& edges = require_field(doc, "edges", "sample");
    if (!edges.is_array()) throw DataError("field \"edges\" is not an array");
    for (const json& je : edges) {
        if (!je.is_object()) throw DataError("entry of \"edges\" is not an object");
        GraphEdge e;
        e.src = require_int(je, "src", "edge");
        e.dst = require_int(je, "dst", "edge");
        e.relation_id = require_int(je, "relation_id", "edge");
        s.graph.edges.push_back(e);
    }

    const json& question = require_field(doc, "question", "sample");
    if (!question.is_array()) throw DataError("field \"question\" is not an array");
    for (const json& jt : question) {
        if (!jt.is_number_integer()) throw DataError("non-integer token in \"question\"");
        s.question.push_back(jt.get<int>());
    }

    const json& labels = require_field(doc, "labels", "sample");
    if (!labels.is_array()) throw DataError("field \"labels\" is not an array");
    for (const json& jy : labels) {
        if (!jy.is_number_integer()) throw DataError("non-integer entry in \"labels\"");
        s.labels.push_back(jy.get<int>());
    }

    s.graph.freeze();
    const std::vector<Violation> violations = validate(s);
    if (!violations.empty()) {
        throw DataError("invalid sample: [" + violations.front().rule + "] " + violations.front().detail);
    }
    return s;
}

namespace {

void append_real(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

std::string serialize_sample(const TaskSample& s) {
    const std::vector<Violation> violations = validate(s);
    if (!violations.empty()) {
        throw DataError("serialize_sample: invalid sample: [" + violations.front().rule + "] " +
                        violations.front().detail);
    }
    TaskSample canon = s;
    canon.graph.freeze();

    std::string out;
    out.reserve(1024);
    out += "{\"d_node\":" + std::to_string(canon.d_node) + ",\"edges\":[";
    for (std::size_t i = 0; i < canon.graph.edges.size(); ++i) {
        const GraphEdge& e = canon.graph.edges[i];
        if (i) out += ",";
        out += "{\"dst\":" + std::to_string(e.dst) + ",\"relation_id\":" + std::to_string(e.relation_id) +
               ",\"src\":" + std::to_string(e.src) + "}";
    }
    out += "],\"labels\":[";
    for (std::size_t i = 0; i < canon.labels.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(canon.labels[i]);
    }
    out += "],\"nodes\":[";
    for (std::size_t i = 0; i < canon.graph.nodes.size(); ++i) {
        const GraphNode& n = canon.graph.nodes[i];
        if (i) out += ",";
        out += "{\"features\":[";
        for (std::size_t j = 0; j < n.features.size(); ++j) {
            if (j) out += ",";
            append_real(out, n.features[j]);
        }
        out += "],\"id\":" + std::to_string(n.id) + ",\"layer\":\"" + layer_name(n.layer) + "\"}";
    }
    out += "],\"question\":[";
    for (std::size_t i = 0; i < canon.question.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(canon.question[i]);
    }
    out += "]}";
    return out;
}

void SynthConfig::check() const {
    auto positive = [](int v, const char* name) {
        if (v < 1) throw DataError(std::string("synth config: ") + name + " must be >= 1");
    };
    positive(n_visual, "n_visual");
    positive(n_semantic, "n_semantic");
    positive(n_fact, "n_fact");
    positive(d_node, "d_node");
    positive(vocab_size, "vocab_size");
    positive(n_relations, "n_relations");
    positive(question_len, "question_len");
    if (noise_sigma < 0.0) throw DataError("synth config: noise_sigma must be >= 0");
    if (vocab_size < n_fact) {
        throw DataError("synth config: vocab_size must be >= n_fact so fact concepts are distinct");
    }
}

SynthOutput generate_synthetic(const SynthConfig& cfg, int n_samples) {
    cfg.check();
    if (n_samples < 0) throw DataError("generate_synthetic: negative sample count");

    SynthOutput out;
    out.meta.vocab_size = cfg.vocab_size;
    out.meta.n_relations = cfg.n_relations;

    Rng rng(cfg.seed);
    out.concept_table = Matrix(cfg.vocab_size, cfg.d_node);
    for (double& v : out.concept_table.data) v = rng.normal();

    const int vis0 = 0;
    const int sem0 = cfg.n_visual;
    const int fact0 = cfg.n_visual + cfg.n_semantic;

    for (int si = 0; si < n_samples; ++si) {
        TaskSample s;
        s.d_node = cfg.d_node;

        std::vector<int> pool(cfg.vocab_size);
        for (int i = 0; i < cfg.vocab_size; ++i) pool[i] = i;
        rng.shuffle(pool);
        std::vector<int> chosen(pool.begin(), pool.begin() + cfg.n_fact);

        SynthLatent latent;
        latent.fact_concepts = chosen;
        latent.answer_pos = rng.uniform_int(cfg.n_fact);
        latent.answer_fact_id = fact0 + latent.answer_pos;
        latent.answer_concept = chosen[static_cast<std::size_t>(latent.answer_pos)];

        // Every fact node gets at least one visual and one semantic source;
        // leftover visual/semantic nodes attach round-robin.
        std::set<std::pair<int, int>> seen;
        std::vector<std::pair<int, int>> arcs;
        auto connect = [&](int src, int dst) {
            if (seen.insert({src, dst}).second) arcs.emplace_back(src, dst);
        };
        for (int f = 0; f < cfg.n_fact; ++f) {
            connect(vis0 + f % cfg.n_visual, fact0 + f);
            connect(sem0 + f % cfg.n_semantic, fact0 + f);
        }
        for (int j = 0; j < cfg.n_visual; ++j) connect(vis0 + j, fact0 + j % cfg.n_fact);
        for (int j = 0; j < cfg.n_semantic; ++j) connect(sem0 + j, fact0 + j % cfg.n_fact);
        for (const auto& [src, dst] : arcs) {
            s.graph.edges.push_back(GraphEdge{src, dst, rng.uniform_int(cfg.n_relations)});
        }

        // Concept indices never used by this sample's facts, for distractors.
        std::vector<int> unrelated(pool.begin() + cfg.n_fact, pool.end());

        auto concept_row = [&](int concept) {
            std::vector<double> v(static_cast<std::size_t>(cfg.d_node));
            for (int d = 0; d < cfg.d_node; ++d) v[static_cast<std::size_t>(d)] = out.concept_table.at(concept, d);
            return v;
        };
        auto noisy_concept = [&](int concept) {
            std::vector<double> v = concept_row(concept);
            for (double& x : v) x += cfg.noise_sigma * rng.normal();
            return v;
        };
        auto pick_unrelated = [&]() {
            if (!unrelated.empty()) return unrelated[static_cast<std::size_t>(rng.uniform_int(
                static_cast<int>(unrelated.size())))];
            int c = rng.uniform_int(cfg.vocab_size - 1);
            if (c >= latent.answer_concept) ++c;
            return c;
        };

        auto source_feature = [&](int node_id) {
            const bool feeds_answer = seen.count({node_id, latent.answer_fact_id}) > 0;
            return noisy_concept(feeds_answer ? latent.answer_concept : pick_unrelated());
        };
        for (int j = 0; j < cfg.n_visual; ++j) {
            s.graph.nodes.push_back(GraphNode{vis0 + j, LayerTag::visual, source_feature(vis0 + j)});
        }
        for (int j = 0; j < cfg.n_semantic; ++j) {
            s.graph.nodes.push_back(GraphNode{sem0 + j, LayerTag::semantic, source_feature(sem0 + j)});
        }
        for (int f = 0; f < cfg.n_fact; ++f) {
            s.graph.nodes.push_back(
                GraphNode{fact0 + f, LayerTag::fact, concept_row(chosen[static_cast<std::size_t>(f)])});
        }

        for (int j = 0; j < cfg.question_len; ++j) {
            s.question.push_back((latent.answer_concept + j) % cfg.vocab_size);
        }
        s.labels.assign(static_cast<std::size_t>(cfg.n_fact), 0);
        s.labels[static_cast<std::size_t>(latent.answer_pos)] = 1;

        s.graph.freeze();
        out.samples.push_back(std::move(s));
        out.latents.push_back(std::move(latent));
    }
    return out;
}

void write_dataset(const std::string& dir, const std::vector<TaskSample>& samples, const DatasetMeta& meta) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create dataset directory " + dir + ": " + ec.message());

    auto write_file = [](const fs::path& path, const std::string& content) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot open " + path.string() + " for writing");
        f << content;
        if (!f) throw DataError("write failed for " + path.string());
    };

    write_file(fs::path(dir) / "meta.json", "{\"n_relations\":" + std::to_string(meta.n_relations) +
                                                ",\"vocab_size\":" + std::to_string(meta.vocab_size) + "}\n");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%06zu.json", i);
        write_file(fs::path(dir) / name, serialize_sample(samples[i]) + "\n");
    }
}

std::pair<std::vector<TaskSample>, DatasetMeta> load_dataset(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir);

    const fs::path meta_path = fs::path(dir) / "meta.json";
    std::ifstream mf(meta_path, std::ios::binary);
    if (!mf) throw DataError("missing meta.json in " + dir);
    std::stringstream mbuf;
    mbuf << mf.rdbuf();
    DatasetMeta meta;
    try {
        json jm = json::parse(mbuf.str());
        meta.vocab_size = require_int(jm, "vocab_size", "meta.json");
        meta.n_relations = require_int(jm, "n_relations", "meta.json");
    } catch (const json::parse_error& e) {
        throw DataError("meta.json: JSON syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
    }

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path p = entry.path();
        if (p.extension() == ".json" && p.filename() != "meta.json") files.push_back(p);
    }
    std::sort(files.begin(), files.end());

    std::vector<TaskSample> samples;
    for (const fs::path& p : files) {
        std::ifstream f(p, std::ios::binary);
        if (!f) throw DataError("cannot read " + p.string());
        std::stringstream buf;
        buf << f.rdbuf();
        TaskSample s;
        try {
            s = parse_sample(buf.str());
        } catch (const DataError& e) {
            throw DataError(p.string() + ": " + e.what());
        }
        const std::vector<Violation> violations = validate(s, &meta);
        if (!violations.empty()) {
            throw DataError(p.string() + ": [" + violations.front().rule + "] " + violations.front().detail);
        }
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw DataError("dataset directory " + dir + " contains no samples");
    return {std::move(samples), meta};
}

}  // namespace modnet
