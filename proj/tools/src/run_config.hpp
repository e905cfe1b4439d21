#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "frameseg/data.hpp"
#include "frameseg/model.hpp"
#include "frameseg/training.hpp"

namespace frameseg::cli {

/// Every knob of a run. Defaults follow the published fine-tuning setup
/// where one exists; toy-model and synthetic-corpus fields are local.
struct RunConfig {
    std::uint64_t seed = 7;

    double lr = 2e-5;
    int grad_accum = 4;
    int batch_size = 16;
    double weight_decay = 0.005;
    double tversky_alpha = 0.3;
    double tversky_beta = kDefaultTverskyBeta;
    double pos_weight = kDefaultPosWeight;
    double loss_epsilon = kDefaultEpsilon;
    int warmup_epochs = 6;
    int frames = 25;
    int beams = 2;
    int epochs = 11;
    bool constrained = true;
    bool system_prompt = false;
    bool eval_every_epoch = true;

    int d_model = 64;
    int n_layers = 2;
    int n_heads = 4;
    int mlp_ratio = 4;
    int seq_margin = 32;

    std::size_t n_samples = 100;
    std::size_t n_val = 20;
    double duration = 150.0;
    std::size_t feature_dim = 16;
    int min_segments = 1;
    int max_segments = 3;
    double noise_std = 0.05;
    std::size_t n_concepts = 8;
    std::size_t n_distractors = 8;

    std::string corpus_dir = "corpus";
    std::string run_dir = "run";
};

/// Sets one field from its text form; throws InvalidInput for unknown keys or bad values.
void set_field(RunConfig& cfg, const std::string& key, const std::string& value);

/// Canonical (key, value) list in declaration order.
std::vector<std::pair<std::string, std::string>> entries(const RunConfig& cfg);

/// Parses a flat `key = value` file; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

/// defaults < file < overrides (each "key=value"); every non-default value is logged with its source.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides);

/// 64-bit FNV-1a over the canonical entries, paths excluded, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Hashed fields only; directories are left to the caller.
nlohmann::json to_json(const RunConfig& cfg);
RunConfig from_json(const nlohmann::json& j);

SynthConfig synth_config(const RunConfig& cfg);
TrainerConfig trainer_config(const RunConfig& cfg);
LossParams loss_params(const RunConfig& cfg);

}  // namespace frameseg::cli
