#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "frameseg/data.hpp"
#include "frameseg/metrics.hpp"
#include "run_config.hpp"

namespace frameseg::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

struct Corpus {
    std::vector<VideoSample> train;
    std::vector<VideoSample> val;
    nlohmann::json manifest;
};

/// Writes train/val JSONL, feature stores and manifest.json into `out_dir`.
/// Refuses a non-empty directory unless `force`.
void cmd_synth(const RunConfig& cfg, const fs::path& out_dir, bool force);

Corpus load_corpus(const fs::path& dir);

struct TrainSummary {
    int last_epoch = 0;
    fs::path last_checkpoint;
    std::optional<MetricsReport> last_val;
    double last_frame_accuracy = 0.0;
};

/// Trains on `corpus_dir` and writes curve.csv, val_metrics.csv, run_config.json
/// and checkpoints/epoch_NNN.ckpt into `run_dir`.
TrainSummary cmd_train(const RunConfig& cfg, const fs::path& corpus_dir, const fs::path& run_dir,
                       const std::optional<fs::path>& resume, bool force);

struct PredictOptions {
    std::string split = "val";
    std::optional<int> beams;
    std::optional<bool> constrained;
    std::optional<int> frames;
};

/// Decodes every sample of one corpus split and writes prediction JSONL.
void cmd_predict(const fs::path& checkpoint, const fs::path& corpus_dir, const fs::path& out,
                 const PredictOptions& options);

std::vector<PredictionRecord> read_predictions(const fs::path& path);
void write_predictions(const fs::path& path, const std::vector<PredictionRecord>& records,
                       const std::string& config_hash, std::uint64_t seed);

/// Scores predictions against ground-truth JSONL; metric values in the JSON are percentages.
MetricsReport cmd_score(const fs::path& predictions, const fs::path& ground_truth,
                        const std::optional<fs::path>& out_json, const std::optional<fs::path>& per_query,
                        std::ostream& table);

DatasetStats cmd_stats(const fs::path& data, int frames, const std::optional<fs::path>& out_json,
                       std::ostream& out);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace frameseg::cli
