#include "rewardlab/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rewardlab {

namespace {

using nlohmann::json;

json tensor_to_json(const Tensor3& t) {
    json out = json::array();
    for (int s = 0; s < t.dim_s; ++s) {
        json plane = json::array();
        for (int a = 0; a < t.dim_a; ++a) {
            const double* row = t.row(s, a);
            plane.push_back(json(std::vector<double>(row, row + t.dim_s2)));
        }
        out.push_back(std::move(plane));
    }
    return out;
}

Tensor3 tensor_from_json(const json& j, int S, int A) {
    Tensor3 t(S, A, S);
    if (static_cast<int>(j.size()) != S)
        throw Error(ErrorCode::ShapeMismatch, "tensor outer dimension");
    for (int s = 0; s < S; ++s) {
        if (static_cast<int>(j[s].size()) != A)
            throw Error(ErrorCode::ShapeMismatch, "tensor action dimension");
        for (int a = 0; a < A; ++a) {
            if (static_cast<int>(j[s][a].size()) != S)
                throw Error(ErrorCode::ShapeMismatch, "tensor successor dimension");
            for (int s2 = 0; s2 < S; ++s2) t(s, a, s2) = j[s][a][s2].get<double>();
        }
    }
    return t;
}

json load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::IoError, path + ": " + e.what());
    }
    return doc;
}

void write_document(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << doc.dump(1) << "\n";
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

} // namespace

void save_mdp_json(const Mdp& mdp, const std::string& path) {
    json doc;
    doc["n_states"] = mdp.n_states;
    doc["n_actions"] = mdp.n_actions;
    doc["gamma"] = mdp.gamma;
    doc["mu0"] = mdp.mu0;
    doc["transition"] = tensor_to_json(mdp.transition);
    write_document(doc, path);
}

Mdp load_mdp_json(const std::string& path) {
    json doc = load_document(path);
    for (const char* key : {"n_states", "n_actions", "gamma", "mu0", "transition"})
        if (!doc.contains(key))
            throw Error(ErrorCode::IoError, path + ": missing key '" + key + "'");
    Mdp mdp;
    mdp.n_states = doc["n_states"].get<int>();
    mdp.n_actions = doc["n_actions"].get<int>();
    mdp.gamma = doc["gamma"].get<double>();
    mdp.mu0 = doc["mu0"].get<std::vector<double>>();
    mdp.transition = tensor_from_json(doc["transition"], mdp.n_states, mdp.n_actions);
    validate_mdp(mdp);
    return mdp;
}

void save_reward_json(const RewardTable& reward, const std::string& path) {
    json doc;
    doc["n_states"] = reward.dim_s;
    doc["n_actions"] = reward.dim_a;
    doc["reward"] = tensor_to_json(reward);
    write_document(doc, path);
}

RewardTable load_reward_json(const std::string& path) {
    json doc = load_document(path);
    for (const char* key : {"n_states", "n_actions", "reward"})
        if (!doc.contains(key))
            throw Error(ErrorCode::IoError, path + ": missing key '" + key + "'");
    int S = doc["n_states"].get<int>();
    int A = doc["n_actions"].get<int>();
    RewardTable r = tensor_from_json(doc["reward"], S, A);
    if (!r.all_finite())
        throw Error(ErrorCode::IoError, path + ": reward entries must be finite");
    return r;
}

void save_batch_json(const RewardPairBatch& batch, std::uint64_t master_seed,
                     int env_index, const std::string& path) {
    json doc;
    doc["n_states"] = batch.env.n_states;
    doc["n_actions"] = batch.env.n_actions;
    doc["gamma"] = batch.env.gamma;
    doc["mu0"] = batch.env.mu0;
    doc["transition"] = tensor_to_json(batch.env.transition);
    json manifest;
    manifest["master_seed"] = master_seed;
    manifest["env_index"] = env_index;
    manifest["env_seed"] = hash64({master_seed, static_cast<std::uint64_t>(env_index),
                                   0, kSeedRoleEnv});
    json pair_seeds = json::array();
    json pairs = json::array();
    for (std::size_t p = 0; p < batch.base_pairs.size(); ++p) {
        pair_seeds.push_back(
            {hash64({master_seed, static_cast<std::uint64_t>(env_index), p,
                     kSeedRoleRewardFirst}),
             hash64({master_seed, static_cast<std::uint64_t>(env_index), p,
                     kSeedRoleRewardSecond})});
        json pair;
        pair["r1"] = tensor_to_json(batch.base_pairs[p].first);
        pair["r2"] = tensor_to_json(batch.base_pairs[p].second);
        pairs.push_back(std::move(pair));
    }
    manifest["pair_seeds"] = std::move(pair_seeds);
    doc["batch_manifest"] = std::move(manifest);
    doc["pairs"] = std::move(pairs);
    write_document(doc, path);
}

namespace {

struct KvLine {
    std::string key, value;
};

std::vector<KvLine> read_kv_lines(const std::string& text) {
    std::vector<KvLine> lines;
    std::istringstream in(text);
    std::string line;
    auto trim = [](std::string s) {
        auto begin = s.find_first_not_of(" \t\r");
        auto end = s.find_last_not_of(" \t\r");
        if (begin == std::string::npos) return std::string();
        return s.substr(begin, end - begin + 1);
    };
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::BadConfig, "expected key = value, got '" + line + "'");
        lines.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
    }
    return lines;
}

double parse_double(const KvLine& kv) {
    try {
        std::size_t pos = 0;
        double v = std::stod(kv.value, &pos);
        if (pos != kv.value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::BadConfig, kv.key + ": bad number '" + kv.value + "'");
    }
}

long long parse_int(const KvLine& kv) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(kv.value, &pos);
        if (pos != kv.value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::BadConfig, kv.key + ": bad integer '" + kv.value + "'");
    }
}

std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        auto begin = item.find_first_not_of(" \t");
        auto end = item.find_last_not_of(" \t");
        if (begin == std::string::npos) continue;
        out.push_back(item.substr(begin, end - begin + 1));
    }
    return out;
}

} // namespace

ExperimentFileConfig parse_config_text(const std::string& text) {
    ExperimentFileConfig cfg;
    for (const KvLine& kv : read_kv_lines(text)) {
        GenConfig& g = cfg.gen;
        if (kv.key == "n_states") g.n_states = static_cast<int>(parse_int(kv));
        else if (kv.key == "n_actions") g.n_actions = static_cast<int>(parse_int(kv));
        else if (kv.key == "gamma") g.gamma = parse_double(kv);
        else if (kv.key == "transition_sparsity_threshold") g.transition_sparsity_threshold = parse_double(kv);
        else if (kv.key == "transition_sparsity_fill") g.transition_sparsity_fill = parse_double(kv);
        else if (kv.key == "reward_sparsify_prob") g.reward_sparsify_prob = parse_double(kv);
        else if (kv.key == "reward_sparsify_threshold") g.reward_sparsify_threshold = parse_double(kv);
        else if (kv.key == "scale_prob") g.scale_prob = parse_double(kv);
        else if (kv.key == "scale_min") g.scale_min = parse_double(kv);
        else if (kv.key == "scale_max") g.scale_max = parse_double(kv);
        else if (kv.key == "translate_prob") g.translate_prob = parse_double(kv);
        else if (kv.key == "translate_min") g.translate_min = parse_double(kv);
        else if (kv.key == "translate_max") g.translate_max = parse_double(kv);
        else if (kv.key == "shaping_prob") g.shaping_prob = parse_double(kv);
        else if (kv.key == "shaping_scale_min") g.shaping_scale_min = parse_double(kv);
        else if (kv.key == "shaping_scale_max") g.shaping_scale_max = parse_double(kv);
        else if (kv.key == "shaping_shift_min") g.shaping_shift_min = parse_double(kv);
        else if (kv.key == "shaping_shift_max") g.shaping_shift_max = parse_double(kv);
        else if (kv.key == "interp_steps") g.interp_steps = static_cast<int>(parse_int(kv));
        else if (kv.key == "pairs_per_env") g.pairs_per_env = static_cast<int>(parse_int(kv));
        else if (kv.key == "n_envs") cfg.n_envs = static_cast<int>(parse_int(kv));
        else if (kv.key == "metric_specs") cfg.metric_specs = split_commas(kv.value);
        else if (kv.key == "master_seed") {
            cfg.master_seed = static_cast<std::uint64_t>(parse_int(kv));
            cfg.master_seed_set = true;
        }
        else if (kv.key == "parallelism") cfg.parallelism = static_cast<int>(parse_int(kv));
        else if (kv.key == "regret_mode") {
            if (kv.value == "exact") cfg.regret_mode = RegretMode::Exact;
            else if (kv.value == "rollout") cfg.regret_mode = RegretMode::Rollout;
            else throw Error(ErrorCode::BadConfig, "regret_mode must be exact or rollout");
        } else {
            throw Error(ErrorCode::BadConfig, "unknown key '" + kv.key + "'");
        }
    }
    cfg.gen.validate();
    if (cfg.n_envs < 1) throw Error(ErrorCode::BadConfig, "n_envs must be >= 1");
    return cfg;
}

ExperimentFileConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace rewardlab
