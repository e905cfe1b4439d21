#include "frameseg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "frameseg/error.hpp"

namespace frameseg {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'F', 'S', 'E', 'G', 'C', 'K', 'P', 'T'};

json config_json(const ToyModelConfig& c) {
    return {{"d_model", c.d_model},
            {"n_layers", c.n_layers},
            {"n_heads", c.n_heads},
            {"mlp_ratio", c.mlp_ratio},
            {"frame_feature_dim", c.frame_feature_dim},
            {"frames", c.frames},
            {"max_seq_len", c.max_seq_len},
            {"vocab", c.vocab.tokens()}};
}

ToyModelConfig config_from_json(const json& j) {
    ToyModelConfig c;
    c.d_model = j.at("d_model").get<int>();
    c.n_layers = j.at("n_layers").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.mlp_ratio = j.at("mlp_ratio").get<int>();
    c.frame_feature_dim = j.at("frame_feature_dim").get<int>();
    c.frames = j.at("frames").get<int>();
    c.max_seq_len = j.at("max_seq_len").get<int>();
    c.vocab = Vocab::from_tokens(j.at("vocab").get<std::vector<std::string>>());
    return c;
}

template <class T>
void write_pod(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in, const std::filesystem::path& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw DataError("checkpoint " + path.string() + " is truncated");
    }
    return value;
}

json tensor_table(const Weights& w, std::uint64_t& offset) {
    json table = json::array();
    w.visit([&](const std::string& name, const Matrix& m) {
        table.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}});
        offset += static_cast<std::uint64_t>(m.size()) * sizeof(double);
    });
    return table;
}

void write_tensors(std::ostream& out, const Weights& w) {
    w.visit([&](const std::string&, const Matrix& m) {
        out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    });
}

void read_tensors(std::istream& in, Weights& w, const json& table, const std::filesystem::path& path) {
    std::size_t i = 0;
    w.visit([&](const std::string& name, Matrix& m) {
        if (i >= table.size()) {
            throw DataError("checkpoint " + path.string() + " lacks tensor " + name);
        }
        const auto& entry = table[i++];
        if (entry.at("name").get<std::string>() != name || entry.at("rows").get<Eigen::Index>() != m.rows() ||
            entry.at("cols").get<Eigen::Index>() != m.cols()) {
            throw DataError("checkpoint " + path.string() + ": tensor " + entry.at("name").get<std::string>() +
                            " does not match expected " + name + " [" + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + "]");
        }
        if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)))) {
            throw DataError("checkpoint " + path.string() + " is truncated in tensor " + name);
        }
    });
    if (i != table.size()) {
        throw DataError("checkpoint " + path.string() + " has unexpected extra tensors");
    }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ToyDecoder& model, const AdamW* optimizer,
                     const CheckpointMeta& meta) {
    std::uint64_t offset = 0;
    json header;
    header["model"] = config_json(model.config());
    header["tensors"] = tensor_table(model.weights(), offset);
    header["epoch"] = meta.epoch;
    header["step"] = meta.step;
    header["seed"] = meta.seed;
    header["config_hash"] = meta.config_hash;
    header["run_config"] = json::parse(meta.run_config);
    if (optimizer != nullptr) {
        const auto& c = optimizer->config();
        header["optimizer"] = {{"type", "adamw"},
                               {"beta1", c.beta1},
                               {"beta2", c.beta2},
                               {"epsilon", c.epsilon},
                               {"weight_decay", c.weight_decay},
                               {"steps", optimizer->steps()}};
    } else {
        header["optimizer"] = nullptr;
    }
    const std::string text = header.dump();

    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write checkpoint " + tmp.string());
        }
        out.write(kMagic, sizeof(kMagic));
        write_pod<std::uint32_t>(out, kCheckpointVersion);
        write_pod<std::uint64_t>(out, text.size());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        write_tensors(out, model.weights());
        if (optimizer != nullptr) {
            write_tensors(out, optimizer->first_moment());
            write_tensors(out, optimizer->second_moment());
        }
        if (!out.flush()) {
            throw DataError("failed writing checkpoint " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open checkpoint " + path.string());
    }
    char magic[sizeof(kMagic)];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError(path.string() + " is not a checkpoint (bad magic)");
    }
    const auto version = read_pod<std::uint32_t>(in, path);
    if (version != kCheckpointVersion) {
        throw DataError("checkpoint " + path.string() + " has unsupported version " + std::to_string(version));
    }
    const auto header_len = read_pod<std::uint64_t>(in, path);
    std::string text(header_len, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) {
        throw DataError("checkpoint " + path.string() + " is truncated in its header");
    }
    json header;
    try {
        header = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError("checkpoint " + path.string() + " has a corrupt header: " + e.what());
    }

    try {
        LoadedCheckpoint ck{ToyDecoder(config_from_json(header.at("model"))), AdamW{}, false, {}};
        const auto& table = header.at("tensors");
        read_tensors(in, ck.model.weights(), table, path);
        ck.meta.epoch = header.at("epoch").get<int>();
        ck.meta.step = header.at("step").get<long>();
        ck.meta.seed = header.at("seed").get<std::uint64_t>();
        ck.meta.config_hash = header.at("config_hash").get<std::string>();
        ck.meta.run_config = header.at("run_config").dump();
        const auto& opt = header.at("optimizer");
        if (!opt.is_null()) {
            AdamWConfig c;
            c.beta1 = opt.at("beta1").get<double>();
            c.beta2 = opt.at("beta2").get<double>();
            c.epsilon = opt.at("epsilon").get<double>();
            c.weight_decay = opt.at("weight_decay").get<double>();
            ck.optimizer = AdamW(ck.model.weights(), c);
            ck.optimizer.set_steps(opt.at("steps").get<long>());
            read_tensors(in, ck.optimizer.first_moment(), table, path);
            read_tensors(in, ck.optimizer.second_moment(), table, path);
            ck.has_optimizer = true;
        }
        if (in.peek() != std::char_traits<char>::eof()) {
            throw DataError("checkpoint " + path.string() + " has trailing bytes");
        }
        return ck;
    } catch (const json::exception& e) {
        throw DataError("checkpoint " + path.string() + " header is missing fields: " + e.what());
    }
}

}  // namespace frameseg
