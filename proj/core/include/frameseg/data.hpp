#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "frameseg/maskcodec.hpp"

namespace frameseg {

inline constexpr double kClipSeconds = 2.0;
// Frame rate assumed when mapping sampled frames to raw video frame indices.
inline constexpr double kVideoFps = 30.0;

/// Row-major rows x cols block of frame features.
struct Features {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    [[nodiscard]] const double* row(std::size_t r) const { return values.data() + r * cols; }
    [[nodiscard]] double* row(std::size_t r) { return values.data() + r * cols; }
    friend bool operator==(const Features&, const Features&) = default;
};

enum class Variation { middle = 0, left = 1, right = 2, random = 3 };

/// One query over one video.
struct VideoSample {
    std::int64_t qid = 0;
    std::string query;
    double duration = 0.0;
    std::optional<std::string> vid;
    std::vector<MomentSpan> gt_spans;
    // clips x annotators, ratings 0..4; empty when the record carries no saliency.
    std::vector<std::vector<int>> gt_clip_saliency;
    // Frame features for the middle, left and right variation, in that order.
    // Empty until attached from a feature store or generated.
    std::vector<Features> variants;
};

// ---------------------------------------------------------------------------
// JSONL ingestion

struct RecordError {
    std::size_t line = 0;
    std::string message;
};

struct LoadResult {
    std::vector<VideoSample> samples;
    std::vector<RecordError> errors;
};

/// Reads QVHighlights-style JSONL. Spans are clamped to [0, duration];
/// saliency lists are expanded to one row per 2-second clip with zeros for
/// clips absent from `relevant_clip_ids`. Malformed records are collected in
/// `errors` (or throw ParseError when `abort_on_error`).
LoadResult load_qvh_jsonl(const std::filesystem::path& path, bool abort_on_error = false);
LoadResult parse_qvh_jsonl(std::istream& in, bool abort_on_error = false);

/// Writes samples back in the same schema; clips with all-zero ratings are omitted.
void write_qvh_jsonl(const std::filesystem::path& path, const std::vector<VideoSample>& samples);
std::string to_qvh_json_line(const VideoSample& sample);

// ---------------------------------------------------------------------------
// Feature store: flat little-endian float64 array + JSON sidecar

/// Writes `<stem>.bin` ([n][3][frames][dim] doubles) and `<stem>.json`
/// (dtype, dims, qid order, variation names).
void write_feature_store(const std::filesystem::path& stem, const std::vector<VideoSample>& samples);

/// Attaches variants to samples by qid; throws DataError if a qid is missing.
void attach_feature_store(const std::filesystem::path& stem, std::vector<VideoSample>& samples);

// ---------------------------------------------------------------------------
// Prompting

/// System prompt used for both training and evaluation.
extern const std::string_view kSystemPrompt;

/// User prompt for `frames` frames with one "Frame k: <image>" line per frame.
std::string build_prompt(std::string_view query, int frames);

// ---------------------------------------------------------------------------
// Statistics

struct DatasetStats {
    std::size_t samples = 0;
    std::size_t fg_frames = 0;
    std::size_t bg_frames = 0;
    double bg_fg_ratio = 0.0;  // +inf when no foreground frames
    double bg_fraction = 0.0;
    // Duration histogram, keyed by the lower edge of 10-second bins.
    std::map<int, std::size_t> duration_histogram;
};

DatasetStats dataset_stats(const std::vector<VideoSample>& samples, int frames);

/// Ground-truth frame labels for a sample.
Bits sample_labels(const VideoSample& sample, int frames);

/// Features with exactly `frames` rows: extra rows are dropped and a short
/// feature block is padded by repeating its last row (with a warning).
Features fit_frames(const Features& features, std::size_t frames);

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SynthConfig {
    std::size_t n_samples = 100;
    std::size_t n_val = 0;
    int frames = 25;
    double duration = 150.0;
    std::size_t feature_dim = 16;
    int min_segments = 1;
    int max_segments = 3;
    double noise_std = 0.05;
    std::size_t n_concepts = 8;
    std::size_t n_distractors = 8;
    std::uint64_t seed = 7;

    void validate() const;
};

struct SynthCorpus {
    std::vector<VideoSample> train;
    std::vector<VideoSample> val;
};

/// Deterministic desk-scale corpus. Foreground frames sit near the prototype
/// of the concept named in the query, background frames near distractor
/// prototypes. Every sample carries three feature variants drawn with
/// independent noise. Train qids are 0..n_samples-1, validation qids follow.
SynthCorpus synth_generate(const SynthConfig& cfg);

/// The concept vocabulary used in synthetic queries.
const std::vector<std::string>& synth_concepts();

/// Picks the feature variant for one pass; `random` draws uniformly from the three.
const Features& variation_pick(const VideoSample& sample, Variation mode, std::mt19937_64& rng);

}  // namespace frameseg
