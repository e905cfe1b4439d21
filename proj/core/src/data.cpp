#include "frameseg/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "frameseg/error.hpp"
#include "frameseg/timeline.hpp"

namespace frameseg {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "feature store assumes a little-endian host");


VideoSample parse_record(const json& j) {
    for (const char* key : {"qid", "query", "duration", "relevant_windows"}) {
        if (!j.contains(key)) {
            throw std::runtime_error(std::string("missing field '") + key + "'");
        }
    }
    VideoSample s;
    if (!j["qid"].is_number_integer()) {
        throw std::runtime_error("'qid' must be an integer");
    }
    s.qid = j["qid"].get<std::int64_t>();
    if (!j["query"].is_string()) {
        throw std::runtime_error("'query' must be a string");
    }
    s.query = j["query"].get<std::string>();
    if (!j["duration"].is_number()) {
        throw std::runtime_error("'duration' must be a number");
    }
    s.duration = j["duration"].get<double>();
    if (!(s.duration > 0.0)) {
        throw std::runtime_error("'duration' must be positive");
    }
    if (j.contains("vid") && j["vid"].is_string()) {
        s.vid = j["vid"].get<std::string>();
    }

    const auto& windows = j["relevant_windows"];
    if (!windows.is_array()) {
        throw std::runtime_error("'relevant_windows' must be an array");
    }
    for (const auto& w : windows) {
        if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
            throw std::runtime_error("'relevant_windows' entries must be [start, end]");
        }
        const double start = std::clamp(w[0].get<double>(), 0.0, s.duration);
        const double end = std::clamp(w[1].get<double>(), 0.0, s.duration);
        if (!(end > start)) {
            throw std::runtime_error("empty relevant window after clamping");
        }
        s.gt_spans.push_back({start, end, std::nullopt});
    }

    const bool has_scores = j.contains("saliency_scores");
    const bool has_ids = j.contains("relevant_clip_ids");
    if (has_scores != has_ids) {
        throw std::runtime_error("'saliency_scores' and 'relevant_clip_ids' must appear together");
    }
    if (has_scores) {
        const auto& scores = j["saliency_scores"];
        const auto& ids = j["relevant_clip_ids"];
        if (!scores.is_array() || !ids.is_array() || scores.size() != ids.size()) {
            throw std::runtime_error("'saliency_scores' and 'relevant_clip_ids' lengths differ");
        }
        const std::size_t clips = clip_count(s.duration, kClipSeconds);
        std::size_t annotators = 0;
        for (const auto& row : scores) {
            if (!row.is_array() || row.empty()) {
                throw std::runtime_error("'saliency_scores' rows must be non-empty arrays");
            }
            if (annotators == 0) {
                annotators = row.size();
            } else if (row.size() != annotators) {
                throw std::runtime_error("inconsistent annotator count in 'saliency_scores'");
            }
        }
        if (annotators > 0) {
            s.gt_clip_saliency.assign(clips, std::vector<int>(annotators, 0));
        }
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (!ids[k].is_number_integer()) {
                throw std::runtime_error("'relevant_clip_ids' must hold integers");
            }
            const auto id = ids[k].get<std::int64_t>();
            if (id < 0 || static_cast<std::size_t>(id) >= clips) {
                spdlog::warn("qid {}: clip id {} outside the {} clips of a {} s video, ignored", s.qid, id, clips,
                             s.duration);
                continue;
            }
            for (std::size_t a = 0; a < annotators; ++a) {
                const auto& v = scores[k][a];
                if (!v.is_number()) {
                    throw std::runtime_error("saliency ratings must be numbers");
                }
                const int r = static_cast<int>(std::lround(v.get<double>()));
                if (r < 0 || r > 4) {
                    throw std::runtime_error("saliency rating outside 0..4");
                }
                s.gt_clip_saliency[static_cast<std::size_t>(id)][a] = r;
            }
        }
    }
    return s;
}

json to_json(const VideoSample& s) {
    json j;
    j["qid"] = s.qid;
    j["query"] = s.query;
    j["duration"] = s.duration;
    if (s.vid) {
        j["vid"] = *s.vid;
    }
    json windows = json::array();
    for (const auto& w : s.gt_spans) {
        windows.push_back({w.start, w.end});
    }
    j["relevant_windows"] = windows;
    if (!s.gt_clip_saliency.empty()) {
        json ids = json::array();
        json scores = json::array();
        for (std::size_t c = 0; c < s.gt_clip_saliency.size(); ++c) {
            const auto& row = s.gt_clip_saliency[c];
            if (std::all_of(row.begin(), row.end(), [](int r) { return r == 0; })) {
                continue;
            }
            ids.push_back(c);
            scores.push_back(row);
        }
        j["relevant_clip_ids"] = ids;
        j["saliency_scores"] = scores;
    }
    return j;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
    return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

LoadResult parse_qvh_jsonl(std::istream& in, bool abort_on_error) {
    LoadResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; })) {
            continue;
        }
        try {
            const json j = json::parse(line);
            if (!j.is_object()) {
                throw std::runtime_error("record is not a JSON object");
            }
            result.samples.push_back(parse_record(j));
        } catch (const std::exception& e) {
            const std::string msg = "line " + std::to_string(line_no) + ": " + e.what();
            if (abort_on_error) {
                throw ParseError(msg, line_no);
            }
            spdlog::warn("skipping record, {}", msg);
            result.errors.push_back({line_no, e.what()});
        }
    }
    if (result.samples.empty() && result.errors.empty()) {
        spdlog::warn("no records found");
    }
    return result;
}

LoadResult load_qvh_jsonl(const std::filesystem::path& path, bool abort_on_error) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return parse_qvh_jsonl(in, abort_on_error);
}

std::string to_qvh_json_line(const VideoSample& sample) { return to_json(sample).dump(); }

void write_qvh_jsonl(const std::filesystem::path& path, const std::vector<VideoSample>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    for (const auto& s : samples) {
        out << to_qvh_json_line(s) << '\n';
    }
}

void write_feature_store(const std::filesystem::path& stem, const std::vector<VideoSample>& samples) {
    std::size_t rows = 0;
    std::size_t cols = 0;
    if (!samples.empty()) {
        if (samples.front().variants.size() != 3) {
            throw DataError("feature store needs three variants per sample");
        }
        rows = samples.front().variants.front().rows;
        cols = samples.front().variants.front().cols;
    }
    std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
    if (!bin) {
        throw DataError("cannot write " + with_suffix(stem, ".bin").string());
    }
    json qids = json::array();
    for (const auto& s : samples) {
        if (s.variants.size() != 3) {
            throw DataError("qid " + std::to_string(s.qid) + " lacks three feature variants");
        }
        for (const auto& v : s.variants) {
            if (v.rows != rows || v.cols != cols) {
                throw DataError("qid " + std::to_string(s.qid) + " has inconsistent feature dims");
            }
            bin.write(reinterpret_cast<const char*>(v.values.data()),
                      static_cast<std::streamsize>(v.values.size() * sizeof(double)));
        }
        qids.push_back(s.qid);
    }
    json side;
    side["dtype"] = "float64";
    side["byte_order"] = "little";
    side["dims"] = {samples.size(), 3, rows, cols};
    side["axes"] = {"sample", "variation", "frame", "feature"};
    side["variations"] = {"middle", "left", "right"};
    side["qids"] = qids;
    std::ofstream js(with_suffix(stem, ".json"), std::ios::binary);
    js << side.dump(2) << '\n';
}

void attach_feature_store(const std::filesystem::path& stem, std::vector<VideoSample>& samples) {
    std::ifstream js(with_suffix(stem, ".json"));
    if (!js) {
        throw DataError("cannot open feature sidecar " + with_suffix(stem, ".json").string());
    }
    const json side = json::parse(js);
    if (side.at("dtype") != "float64") {
        throw DataError("unsupported feature dtype " + side.at("dtype").dump());
    }
    const auto dims = side.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() != 4 || dims[1] != 3) {
        throw DataError("feature sidecar dims must be [n, 3, frames, dim]");
    }
    const auto qids = side.at("qids").get<std::vector<std::int64_t>>();
    if (qids.size() != dims[0]) {
        throw DataError("feature sidecar qid list does not match dims");
    }
    const std::size_t block = dims[2] * dims[3];
    std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
    if (!bin) {
        throw DataError("cannot open feature array " + with_suffix(stem, ".bin").string());
    }
    std::unordered_map<std::int64_t, std::vector<Features>> by_qid;
    for (const auto qid : qids) {
        std::vector<Features> variants(3);
        for (auto& v : variants) {
            v.rows = dims[2];
            v.cols = dims[3];
            v.values.resize(block);
            bin.read(reinterpret_cast<char*>(v.values.data()), static_cast<std::streamsize>(block * sizeof(double)));
            if (!bin) {
                throw DataError("feature array truncated at qid " + std::to_string(qid));
            }
        }
        by_qid.emplace(qid, std::move(variants));
    }
    for (auto& s : samples) {
        auto it = by_qid.find(s.qid);
        if (it == by_qid.end()) {
            throw DataError("no features stored for qid " + std::to_string(s.qid));
        }
        s.variants = it->second;
    }
}

const std::string_view kSystemPrompt =
    "You are a smart video retrieval assistant. \n"
    "You will receive a video and a human activity query given by the user. \n"
    "Return the frames that matches the activity query. \n"
    "Follow the output format given by the user.";

std::string build_prompt(std::string_view query, int frames) {
    if (query.empty()) {
        throw InvalidInput("build_prompt: empty query");
    }
    if (frames < 1) {
        throw InvalidInput("build_prompt: frame count must be >= 1");
    }
    const std::string f = std::to_string(frames);
    std::ostringstream os;
    os << "You are given " << f
       << " frames sampled from a video, ordered and separated by newline characters, indexed from 0 to "
       << (frames - 1) << ":\n";
    for (int k = 0; k < frames; ++k) {
        os << "Frame " << k << ": <image>\n";
    }
    os << "\n**Your task**: given an activity, analyze the video frames to identify which ones contain the "
          "specified activity.\n\n"
       << "**Output format**: provide a " << f << " character binary segmentation mask, specifically:\n"
       << "- '1' means the frame at that position likely matches to the activity.\n"
       << "- '0' means the frame at that position likely does not match to the activity.\n"
       << "- Your output must be exactly " << f
       << " characters long and contain only '1's and '0's, with no spaces or other delimiters and no "
          "explanations.\n\n"
       << "**Activity**: " << query << "\n\n"
       << "**Question**: Which frames contains the activity?";
    return os.str();
}

Bits sample_labels(const VideoSample& sample, int frames) {
    const Timeline tl(sample.duration, kVideoFps, frames);
    return moments_to_mask(sample.gt_spans, tl);
}

DatasetStats dataset_stats(const std::vector<VideoSample>& samples, int frames) {
    DatasetStats st;
    st.samples = samples.size();
    for (const auto& s : samples) {
        const Bits bits = sample_labels(s, frames);
        for (const auto b : bits) {
            (b != 0 ? st.fg_frames : st.bg_frames) += 1;
        }
        st.duration_histogram[static_cast<int>(std::floor(s.duration / 10.0)) * 10] += 1;
    }
    const std::size_t total = st.fg_frames + st.bg_frames;
    if (st.fg_frames == 0) {
        if (total > 0) {
            spdlog::warn("dataset has no foreground frames; background:foreground ratio is infinite");
        }
        st.bg_fg_ratio = std::numeric_limits<double>::infinity();
    } else {
        st.bg_fg_ratio = static_cast<double>(st.bg_frames) / static_cast<double>(st.fg_frames);
    }
    st.bg_fraction = total == 0 ? 0.0 : static_cast<double>(st.bg_frames) / static_cast<double>(total);
    return st;
}

Features fit_frames(const Features& features, std::size_t frames) {
    if (features.rows == 0) {
        throw InvalidInput("fit_frames: no feature rows");
    }
    if (features.rows == frames) {
        return features;
    }
    Features out;
    out.rows = frames;
    out.cols = features.cols;
    out.values.resize(frames * features.cols);
    if (features.rows < frames) {
        spdlog::warn("only {} frame(s) available for {} slots; repeating the last frame", features.rows, frames);
    }
    for (std::size_t r = 0; r < frames; ++r) {
        const std::size_t src = std::min(r, features.rows - 1);
        std::copy_n(features.row(src), features.cols, out.row(r));
    }
    return out;
}

// ---------------------------------------------------------------------------

void SynthConfig::validate() const {
    if (frames < 1) {
        throw InvalidInput("synth: frames must be >= 1");
    }
    if (!(duration > 0.0)) {
        throw InvalidInput("synth: duration must be positive");
    }
    if (feature_dim == 0) {
        throw InvalidInput("synth: feature_dim must be positive");
    }
    if (min_segments < 1 || max_segments < min_segments) {
        throw InvalidInput("synth: need 1 <= min_segments <= max_segments");
    }
    if (!(noise_std >= 0.0)) {
        throw InvalidInput("synth: noise_std must be non-negative");
    }
    if (n_concepts == 0 || n_concepts > synth_concepts().size()) {
        throw InvalidInput("synth: n_concepts must be in 1.." + std::to_string(synth_concepts().size()));
    }
    if (n_distractors == 0) {
        throw InvalidInput("synth: n_distractors must be positive");
    }
}

const std::vector<std::string>& synth_concepts() {
    static const std::vector<std::string> concepts = {
        "cooking", "dancing", "surfing",  "painting", "running",  "singing", "cycling", "swimming",
        "skating", "climbing", "juggling", "gardening", "typing", "boxing",  "rowing",  "fishing"};
    return concepts;
}

namespace {

std::vector<std::vector<double>> unit_prototypes(std::size_t count, std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> out(count, std::vector<double>(dim));
    for (auto& p : out) {
        double norm = 0.0;
        for (auto& v : p) {
            v = normal(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : p) {
            v /= norm;
        }
    }
    return out;
}

// Disjoint, non-adjacent foreground runs as [first, last] frame pairs.
std::vector<std::pair<int, int>> plant_runs(const SynthConfig& cfg, std::mt19937_64& rng) {
    constexpr int kAttempts = 100;
    const int f = cfg.frames;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const int n_seg = std::uniform_int_distribution<int>(cfg.min_segments, cfg.max_segments)(rng);
        const int max_len = std::max(1, static_cast<int>(std::lround(0.6 * f / n_seg)));
        std::vector<int> lengths(static_cast<std::size_t>(n_seg));
        int used = n_seg - 1;
        for (auto& len : lengths) {
            len = std::uniform_int_distribution<int>(1, max_len)(rng);
            used += len;
        }
        if (used > f) {
            continue;
        }
        // Spread the remaining background frames over the n_seg + 1 gaps.
        std::vector<int> gaps(static_cast<std::size_t>(n_seg) + 1, 0);
        std::uniform_int_distribution<int> pick_gap(0, n_seg);
        for (int k = 0; k < f - used; ++k) {
            ++gaps[static_cast<std::size_t>(pick_gap(rng))];
        }
        std::vector<std::pair<int, int>> runs;
        int pos = gaps[0];
        for (int s = 0; s < n_seg; ++s) {
            const int len = lengths[static_cast<std::size_t>(s)];
            runs.emplace_back(pos, pos + len - 1);
            pos += len + 1 + gaps[static_cast<std::size_t>(s) + 1];
        }
        return runs;
    }
    throw DataError("synth: cannot pack " + std::to_string(cfg.min_segments) + ".." +
                    std::to_string(cfg.max_segments) + " segments into " + std::to_string(f) + " frames");
}

VideoSample synth_sample(const SynthConfig& cfg, std::int64_t qid, const std::vector<std::vector<double>>& concepts,
                         const std::vector<std::vector<double>>& distractors) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(qid), static_cast<std::uint32_t>(qid >> 32), 0x5a3du};
    std::mt19937_64 rng(seq);

    VideoSample s;
    s.qid = qid;
    s.vid = "synth_" + std::to_string(qid);
    s.duration = cfg.duration;
    const auto concept_id = std::uniform_int_distribution<std::size_t>(0, cfg.n_concepts - 1)(rng);
    s.query = "A person is " + synth_concepts()[concept_id] + " on camera.";

    const Timeline tl(cfg.duration, kVideoFps, cfg.frames);
    Bits fg(static_cast<std::size_t>(cfg.frames), 0);
    for (const auto& [first, last] : plant_runs(cfg, rng)) {
        s.gt_spans.push_back({tl.window(first).start, tl.window(last).end, std::nullopt});
        for (int i = first; i <= last; ++i) {
            fg[static_cast<std::size_t>(i)] = 1;
        }
    }

    std::uniform_int_distribution<std::size_t> pick_distractor(0, distractors.size() - 1);
    std::vector<const std::vector<double>*> base(fg.size());
    for (std::size_t i = 0; i < fg.size(); ++i) {
        base[i] = fg[i] != 0 ? &concepts[concept_id] : &distractors[pick_distractor(rng)];
    }
    std::normal_distribution<double> noise(0.0, 1.0);
    s.variants.resize(3);
    for (auto& v : s.variants) {
        v.rows = fg.size();
        v.cols = cfg.feature_dim;
        v.values.resize(v.rows * v.cols);
        for (std::size_t i = 0; i < v.rows; ++i) {
            for (std::size_t d = 0; d < v.cols; ++d) {
                v.row(i)[d] = (*base[i])[d] + cfg.noise_std * noise(rng);
            }
        }
    }

    constexpr std::size_t kAnnotators = 3;
    const auto clips = clip_query_times(cfg.duration, kClipSeconds);
    std::bernoulli_distribution very_good(2.0 / 3.0);
    std::bernoulli_distribution faint(0.5);
    s.gt_clip_saliency.assign(clips.size(), std::vector<int>(kAnnotators, 0));
    for (std::size_t c = 0; c < clips.size(); ++c) {
        const bool inside = std::any_of(s.gt_spans.begin(), s.gt_spans.end(), [&](const MomentSpan& sp) {
            return clips[c] >= sp.start && clips[c] < sp.end;
        });
        for (auto& r : s.gt_clip_saliency[c]) {
            r = inside ? (very_good(rng) ? 4 : 3) : (faint(rng) ? 1 : 0);
        }
    }
    return s;
}

}  // namespace

SynthCorpus synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    std::seed_seq world_seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                            0xc0ffeeu};
    std::mt19937_64 world(world_seq);
    const auto concepts = unit_prototypes(cfg.n_concepts, cfg.feature_dim, world);
    const auto distractors = unit_prototypes(cfg.n_distractors, cfg.feature_dim, world);

    SynthCorpus corpus;
    corpus.train.reserve(cfg.n_samples);
    corpus.val.reserve(cfg.n_val);
    for (std::size_t i = 0; i < cfg.n_samples; ++i) {
        corpus.train.push_back(synth_sample(cfg, static_cast<std::int64_t>(i), concepts, distractors));
    }
    for (std::size_t i = 0; i < cfg.n_val; ++i) {
        corpus.val.push_back(
            synth_sample(cfg, static_cast<std::int64_t>(cfg.n_samples + i), concepts, distractors));
    }
    return corpus;
}

const Features& variation_pick(const VideoSample& sample, Variation mode, std::mt19937_64& rng) {
    if (sample.variants.empty()) {
        throw InvalidInput("variation_pick: qid " + std::to_string(sample.qid) + " has no features attached");
    }
    std::size_t idx = 0;
    if (mode == Variation::random) {
        idx = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
    } else {
        idx = static_cast<std::size_t>(mode);
    }
    // A sample with only middle features uses them for every variation.
    return sample.variants[std::min(idx, sample.variants.size() - 1)];
}

}  // namespace frameseg
