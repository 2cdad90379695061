#include "modnet/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "modnet/errors.hpp"

using json = nlohmann::json;

namespace modnet {

InferenceConfig InferenceConfig::normalized() const {
    InferenceConfig c = *this;
    if (c.single_unit_mode) {
        c.n_units = 1;
        c.k_active = 1;
    }
    return c;
}

void InferenceConfig::validate() const {
    const InferenceConfig c = normalized();
    if (c.n_units < 1) throw DataError("inference config: n_units must be >= 1");
    if (c.k_active < 1 || c.k_active > c.n_units) {
        throw DataError("inference config: need 1 <= k_active <= n_units, got k_active=" +
                        std::to_string(c.k_active) + ", n_units=" + std::to_string(c.n_units));
    }
    if (c.n_steps < 1) throw DataError("inference config: n_steps must be >= 1");
    if (c.d_hidden < 1 || c.d_key < 1 || c.d_value < 1) {
        throw DataError("inference config: d_hidden, d_key, d_value must be >= 1");
    }
    if (c.d_value != c.d_hidden) {
        throw DataError("inference config: d_value must equal d_hidden (residual addition), got d_value=" +
                        std::to_string(c.d_value) + ", d_hidden=" + std::to_string(c.d_hidden));
    }
    if (c.d_emb < 0 || c.d_rel < 1 || c.d_rel_out < 0 || c.d_a < 0) {
        throw DataError("inference config: bad embedding dimensions");
    }
    if (c.modality_schedule.empty()) throw DataError("inference config: empty modality_schedule");
}

void TrainConfig::validate() const {
    inference.validate();
    if (epochs < 1) throw DataError("train config: epochs must be >= 1");
    if (batch_size < 1) throw DataError("train config: batch_size must be >= 1");
    if (!(lr > 0.0)) throw DataError("train config: lr must be positive");
    if (warmup_epochs < 0 || warmup_epochs > epochs) {
        throw DataError("train config: need 0 <= warmup_epochs <= epochs");
    }
    if (!(warmup_factor > 0.0)) throw DataError("train config: warmup_factor must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        throw DataError("train config: adam betas must lie in (0, 1)");
    }
    if (!(adam_eps > 0.0)) throw DataError("train config: adam_eps must be positive");
    if (!(loss.a > 0.0 && loss.b > 0.0)) throw DataError("train config: loss weights must be positive");
    if (synth) synth->check();
}

namespace {

void get_if(const json& j, const char* key, int& out) {
    if (j.contains(key)) out = j.at(key).get<int>();
}
void get_if(const json& j, const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
}
void get_if(const json& j, const char* key, bool& out) {
    if (j.contains(key)) out = j.at(key).get<bool>();
}
void get_if(const json& j, const char* key, std::uint64_t& out) {
    if (j.contains(key)) out = j.at(key).get<std::uint64_t>();
}
void get_if(const json& j, const char* key, std::string& out) {
    if (j.contains(key)) out = j.at(key).get<std::string>();
}

InferenceConfig inference_from_json(const json& j) {
    InferenceConfig c;
    get_if(j, "n_units", c.n_units);
    get_if(j, "k_active", c.k_active);
    get_if(j, "n_steps", c.n_steps);
    get_if(j, "d_hidden", c.d_hidden);
    get_if(j, "d_key", c.d_key);
    get_if(j, "d_value", c.d_value);
    get_if(j, "d_emb", c.d_emb);
    get_if(j, "d_rel", c.d_rel);
    get_if(j, "d_rel_out", c.d_rel_out);
    get_if(j, "d_a", c.d_a);
    if (j.contains("modality_schedule")) {
        c.modality_schedule.clear();
        for (const json& m : j.at("modality_schedule")) c.modality_schedule.push_back(layer_from_name(m.get<std::string>()));
    }
    get_if(j, "disable_communication", c.disable_communication);
    get_if(j, "disable_memory_update", c.disable_memory_update);
    get_if(j, "single_unit_mode", c.single_unit_mode);
    get_if(j, "use_bias", c.use_bias);
    get_if(j, "update_tanh", c.update_tanh);
    return c;
}

json inference_to_json(const InferenceConfig& c) {
    json j;
    j["n_units"] = c.n_units;
    j["k_active"] = c.k_active;
    j["n_steps"] = c.n_steps;
    j["d_hidden"] = c.d_hidden;
    j["d_key"] = c.d_key;
    j["d_value"] = c.d_value;
    j["d_emb"] = c.d_emb;
    j["d_rel"] = c.d_rel;
    j["d_rel_out"] = c.d_rel_out;
    j["d_a"] = c.d_a;
    json sched = json::array();
    for (LayerTag t : c.modality_schedule) sched.push_back(layer_name(t));
    j["modality_schedule"] = sched;
    j["disable_communication"] = c.disable_communication;
    j["disable_memory_update"] = c.disable_memory_update;
    j["single_unit_mode"] = c.single_unit_mode;
    j["use_bias"] = c.use_bias;
    j["update_tanh"] = c.update_tanh;
    return j;
}

SynthConfig synth_from_json(const json& j) {
    SynthConfig c;
    get_if(j, "n_visual", c.n_visual);
    get_if(j, "n_semantic", c.n_semantic);
    get_if(j, "n_fact", c.n_fact);
    get_if(j, "d_node", c.d_node);
    get_if(j, "vocab_size", c.vocab_size);
    get_if(j, "n_relations", c.n_relations);
    get_if(j, "question_len", c.question_len);
    get_if(j, "noise_sigma", c.noise_sigma);
    get_if(j, "seed", c.seed);
    return c;
}

json synth_to_json(const SynthConfig& c) {
    json j;
    j["n_visual"] = c.n_visual;
    j["n_semantic"] = c.n_semantic;
    j["n_fact"] = c.n_fact;
    j["d_node"] = c.d_node;
    j["vocab_size"] = c.vocab_size;
    j["n_relations"] = c.n_relations;
    j["question_len"] = c.question_len;
    j["noise_sigma"] = c.noise_sigma;
    j["seed"] = c.seed;
    return j;
}

}  // namespace

TrainConfig parse_train_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError("config: JSON syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    TrainConfig c;
    try {
        get_if(j, "epochs", c.epochs);
        get_if(j, "batch_size", c.batch_size);
        get_if(j, "lr", c.lr);
        get_if(j, "warmup_epochs", c.warmup_epochs);
        get_if(j, "warmup_factor", c.warmup_factor);
        get_if(j, "beta1", c.beta1);
        get_if(j, "beta2", c.beta2);
        get_if(j, "adam_eps", c.adam_eps);
        get_if(j, "seed", c.seed);
        get_if(j, "stop_at_train_acc", c.stop_at_train_acc);
        if (j.contains("inference")) c.inference = inference_from_json(j.at("inference"));
        if (j.contains("loss")) {
            get_if(j.at("loss"), "a", c.loss.a);
            get_if(j.at("loss"), "b", c.loss.b);
        }
        if (j.contains("synth")) c.synth = synth_from_json(j.at("synth"));
        get_if(j, "data", c.data_path);
    } catch (const json::exception& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot read config file " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_train_config(buf.str());
}

std::string dump_train_config(const TrainConfig& c) {
    json j;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["lr"] = c.lr;
    j["warmup_epochs"] = c.warmup_epochs;
    j["warmup_factor"] = c.warmup_factor;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["adam_eps"] = c.adam_eps;
    j["seed"] = c.seed;
    j["stop_at_train_acc"] = c.stop_at_train_acc;
    j["inference"] = inference_to_json(c.inference);
    j["loss"] = json{{"a", c.loss.a}, {"b", c.loss.b}};
    if (c.synth) j["synth"] = synth_to_json(*c.synth);
    if (!c.data_path.empty()) j["data"] = c.data_path;
    return j.dump();
}

std::string model_signature(const InferenceConfig& inf, const LossConfig& loss, int vocab_size, int n_relations,
                            int d_node) {
    json j;
    j["inference"] = inference_to_json(inf.normalized());
    j["loss"] = json{{"a", loss.a}, {"b", loss.b}};
    j["vocab_size"] = vocab_size;
    j["n_relations"] = n_relations;
    j["d_node"] = d_node;
    return j.dump();
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace modnet
