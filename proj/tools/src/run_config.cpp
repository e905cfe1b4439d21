#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "frameseg/error.hpp"

namespace frameseg::cli {

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw InvalidInput("config: bad value '" + text + "' for " + key);
    }
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no" || text == "off") {
        return false;
    }
    throw InvalidInput("config: bad boolean '" + text + "' for " + key);
}

struct Field {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
    bool hashed = true;
};

template <class T>
Field number_field(T RunConfig::*member) {
    return {[member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_number<T>(k, v); },
            [member](const RunConfig& c) { return fmt::format("{}", c.*member); }};
}

Field bool_field(bool RunConfig::*member) {
    return {[member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_bool(k, v); },
            [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field path_field(std::string RunConfig::*member) {
    return {[member](RunConfig& c, const std::string&, const std::string& v) { c.*member = v; },
            [member](const RunConfig& c) { return c.*member; }, false};
}

const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = {
        {"seed", number_field(&RunConfig::seed)},
        {"lr", number_field(&RunConfig::lr)},
        {"grad_accum", number_field(&RunConfig::grad_accum)},
        {"batch_size", number_field(&RunConfig::batch_size)},
        {"weight_decay", number_field(&RunConfig::weight_decay)},
        {"tversky_alpha", number_field(&RunConfig::tversky_alpha)},
        {"tversky_beta", number_field(&RunConfig::tversky_beta)},
        {"pos_weight", number_field(&RunConfig::pos_weight)},
        {"loss_epsilon", number_field(&RunConfig::loss_epsilon)},
        {"warmup_epochs", number_field(&RunConfig::warmup_epochs)},
        {"frames", number_field(&RunConfig::frames)},
        {"beams", number_field(&RunConfig::beams)},
        {"epochs", number_field(&RunConfig::epochs)},
        {"constrained", bool_field(&RunConfig::constrained)},
        {"system_prompt", bool_field(&RunConfig::system_prompt)},
        {"eval_every_epoch", bool_field(&RunConfig::eval_every_epoch)},
        {"d_model", number_field(&RunConfig::d_model)},
        {"n_layers", number_field(&RunConfig::n_layers)},
        {"n_heads", number_field(&RunConfig::n_heads)},
        {"mlp_ratio", number_field(&RunConfig::mlp_ratio)},
        {"seq_margin", number_field(&RunConfig::seq_margin)},
        {"n_samples", number_field(&RunConfig::n_samples)},
        {"n_val", number_field(&RunConfig::n_val)},
        {"duration", number_field(&RunConfig::duration)},
        {"feature_dim", number_field(&RunConfig::feature_dim)},
        {"min_segments", number_field(&RunConfig::min_segments)},
        {"max_segments", number_field(&RunConfig::max_segments)},
        {"noise_std", number_field(&RunConfig::noise_std)},
        {"n_concepts", number_field(&RunConfig::n_concepts)},
        {"n_distractors", number_field(&RunConfig::n_distractors)},
        {"corpus_dir", path_field(&RunConfig::corpus_dir)},
        {"run_dir", path_field(&RunConfig::run_dir)},
    };
    return table;
}

const Field& find_field(const std::string& key) {
    for (const auto& [name, field] : fields()) {
        if (name == key) {
            return field;
        }
    }
    throw InvalidInput("config: unknown key '" + key + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::pair<std::string, std::string> split_assignment(const std::string& text, const std::string& where) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
        throw InvalidInput(where + ": expected key=value, got '" + text + "'");
    }
    return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

}  // namespace

void set_field(RunConfig& cfg, const std::string& key, const std::string& value) {
    find_field(key).set(cfg, key, value);
}

std::vector<std::pair<std::string, std::string>> entries(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, field] : fields()) {
        out.emplace_back(name, field.get(cfg));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config file " + path.string());
    }
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(split_assignment(line, path.string() + ":" + std::to_string(lineno)));
        } catch (const InvalidInput& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return out;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides) {
    RunConfig cfg;
    std::map<std::string, std::string> source;
    if (file) {
        for (const auto& [k, v] : read_config_file(*file)) {
            set_field(cfg, k, v);
            source[k] = "file " + file->string();
        }
    }
    for (const auto& o : overrides) {
        const auto [k, v] = split_assignment(o, "override");
        set_field(cfg, k, v);
        source[k] = "flag";
    }
    const RunConfig defaults;
    const auto base = entries(defaults);
    const auto now = entries(cfg);
    for (std::size_t i = 0; i < now.size(); ++i) {
        if (now[i].second != base[i].second) {
            spdlog::info("config {} = {} ({})", now[i].first, now[i].second, source[now[i].first]);
        }
    }
    return cfg;
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto& table = fields();
    for (const auto& [name, field] : table) {
        if (!field.hashed) {
            continue;
        }
        const std::string line = name + "=" + field.get(cfg) + "\n";
        for (const unsigned char c : line) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    }
    return fmt::format("{:016x}", h);
}

nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, field] : fields()) {
        if (field.hashed) {
            j[name] = field.get(cfg);
        }
    }
    return j;
}

RunConfig from_json(const nlohmann::json& j) {
    RunConfig cfg;
    for (const auto& [k, v] : j.items()) {
        set_field(cfg, k, v.is_string() ? v.get<std::string>() : v.dump());
    }
    return cfg;
}

SynthConfig synth_config(const RunConfig& cfg) {
    SynthConfig s;
    s.n_samples = cfg.n_samples;
    s.n_val = cfg.n_val;
    s.frames = cfg.frames;
    s.duration = cfg.duration;
    s.feature_dim = cfg.feature_dim;
    s.min_segments = cfg.min_segments;
    s.max_segments = cfg.max_segments;
    s.noise_std = cfg.noise_std;
    s.n_concepts = cfg.n_concepts;
    s.n_distractors = cfg.n_distractors;
    s.seed = cfg.seed;
    return s;
}

LossParams loss_params(const RunConfig& cfg) {
    LossParams p;
    p.pos_weight = cfg.pos_weight;
    p.alpha = cfg.tversky_alpha;
    p.beta = cfg.tversky_beta;
    p.epsilon = cfg.loss_epsilon;
    return p;
}

TrainerConfig trainer_config(const RunConfig& cfg) {
    TrainerConfig t;
    t.epochs = cfg.epochs;
    t.warmup_epochs = cfg.warmup_epochs;
    t.batch_size = cfg.batch_size;
    t.grad_accum = cfg.grad_accum;
    t.lr = cfg.lr;
    t.adamw.weight_decay = cfg.weight_decay;
    t.loss = loss_params(cfg);
    t.frames = cfg.frames;
    t.system_prompt = cfg.system_prompt;
    t.seed = cfg.seed;
    return t;
}

}  // namespace frameseg::cli
