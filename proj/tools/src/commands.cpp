#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "frameseg/checkpoint.hpp"
#include "frameseg/error.hpp"
#include "frameseg/training.hpp"
#include "frameseg/vocab.hpp"

namespace frameseg::cli {

namespace {

using nlohmann::json;

const char* const kMetricKeys[] = {"R1@0.5", "R1@0.7", "mAP@0.5", "mAP@0.75", "mAP_avg", "HL_mAP", "HL_HIT@1"};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << text;
    if (!out.flush()) {
        throw DataError("failed writing " + path.string());
    }
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::vector<VideoSample> load_split(const fs::path& dir, const std::string& split) {
    auto loaded = load_qvh_jsonl(dir / (split + ".jsonl"), true);
    attach_feature_store(dir / (split + "_features"), loaded.samples);
    return std::move(loaded.samples);
}

std::size_t prompt_tokens(const std::string& query, int frames, bool system_prompt) {
    std::size_t n = tokenize(build_prompt(query, frames)).size();
    if (system_prompt) {
        n += tokenize(kSystemPrompt).size();
    }
    return n;
}

ToyModelConfig model_config(const RunConfig& cfg, const Corpus& corpus) {
    ToyModelConfig mc;
    mc.d_model = cfg.d_model;
    mc.n_layers = cfg.n_layers;
    mc.n_heads = cfg.n_heads;
    mc.mlp_ratio = cfg.mlp_ratio;
    mc.frames = cfg.frames;
    mc.frame_feature_dim = static_cast<int>(corpus.train.front().variants.front().cols);
    mc.vocab = Vocab::build(vocabulary_texts(corpus.train, cfg.frames, cfg.system_prompt));
    std::size_t longest = 0;
    for (const auto* split : {&corpus.train, &corpus.val}) {
        for (const auto& s : *split) {
            longest = std::max(longest, prompt_tokens(s.query, cfg.frames, cfg.system_prompt));
        }
    }
    mc.max_seq_len = static_cast<int>(longest) + cfg.frames + 1 + cfg.seq_margin;
    return mc;
}

std::string csv_number(double v) { return fmt::format("{}", v); }

/// Keeps the comment/header lines and the rows whose first column is <= max_epoch.
void truncate_csv(const fs::path& path, int max_epoch) {
    std::ifstream in(path);
    if (!in) {
        return;
    }
    std::ostringstream kept;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("epoch", 0) == 0) {
            kept << line << '\n';
            continue;
        }
        if (std::stoi(line.substr(0, line.find(','))) <= max_epoch) {
            kept << line << '\n';
        }
    }
    in.close();
    write_text(path, kept.str());
}

std::string checkpoint_name(int epoch) { return fmt::format("epoch_{:03d}.ckpt", epoch); }

nlohmann::ordered_json prediction_json(const PredictionRecord& rec) {
    nlohmann::ordered_json windows = nlohmann::ordered_json::array();
    for (const auto& s : rec.pred_spans) {
        windows.push_back({s.start, s.end, s.confidence.value_or(0.0)});
    }
    return {{"qid", rec.qid}, {"pred_relevant_windows", windows}, {"pred_saliency_scores", rec.pred_clip_scores}};
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_synth(const RunConfig& cfg, const fs::path& out_dir, bool force) {
    if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force) {
        throw DataError("output directory " + out_dir.string() + " is not empty (use --force to overwrite)");
    }
    const SynthConfig sc = synth_config(cfg);
    const SynthCorpus corpus = synth_generate(sc);
    if (corpus.train.empty() && corpus.val.empty()) {
        spdlog::warn("synth: n_samples and n_val are both 0, writing an empty corpus");
    }
    fs::create_directories(out_dir);
    write_qvh_jsonl(out_dir / "train.jsonl", corpus.train);
    write_qvh_jsonl(out_dir / "val.jsonl", corpus.val);
    write_feature_store(out_dir / "train_features", corpus.train);
    write_feature_store(out_dir / "val_features", corpus.val);

    json manifest;
    manifest["config_hash"] = config_hash(cfg);
    manifest["seed"] = cfg.seed;
    manifest["frames"] = sc.frames;
    manifest["feature_dim"] = sc.feature_dim;
    manifest["duration"] = sc.duration;
    manifest["n_train"] = corpus.train.size();
    manifest["n_val"] = corpus.val.size();
    manifest["files"] = {{"train", "train.jsonl"},
                         {"val", "val.jsonl"},
                         {"train_features", "train_features"},
                         {"val_features", "val_features"}};
    manifest["run_config"] = to_json(cfg);
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    spdlog::info("synth: wrote {} train / {} val samples to {}", corpus.train.size(), corpus.val.size(),
                 out_dir.string());
}

Corpus load_corpus(const fs::path& dir) {
    Corpus c;
    c.manifest = read_json(dir / "manifest.json");
    c.train = load_split(dir, "train");
    c.val = load_split(dir, "val");
    return c;
}

// ---------------------------------------------------------------------------

TrainSummary cmd_train(const RunConfig& cfg, const fs::path& corpus_dir, const fs::path& run_dir,
                       const std::optional<fs::path>& resume, bool force) {
    const Corpus corpus = load_corpus(corpus_dir);
    if (corpus.train.empty()) {
        throw DataError("corpus " + corpus_dir.string() + " has no training samples");
    }
    if (corpus.manifest.contains("frames") && corpus.manifest["frames"].get<int>() != cfg.frames) {
        spdlog::warn("corpus was generated with {} frames, training uses {}", corpus.manifest["frames"].get<int>(),
                     cfg.frames);
    }
    const std::string hash = config_hash(cfg);
    const fs::path curve_path = run_dir / "curve.csv";
    const fs::path val_path = run_dir / "val_metrics.csv";
    const fs::path ckpt_dir = run_dir / "checkpoints";
    if (!resume && fs::exists(curve_path) && !force) {
        throw DataError("run directory " + run_dir.string() + " already holds a run (use --force or --resume)");
    }
    fs::create_directories(ckpt_dir);

    std::optional<LoadedCheckpoint> loaded;
    int first_epoch = 1;
    if (resume) {
        loaded.emplace(load_checkpoint(*resume));
        if (loaded->meta.config_hash != hash) {
            spdlog::warn("resuming from a checkpoint with config hash {} under config {}", loaded->meta.config_hash,
                         hash);
        }
        if (loaded->model.config().frames != cfg.frames) {
            throw DataError("checkpoint was trained with " + std::to_string(loaded->model.config().frames) +
                            " frames, config asks for " + std::to_string(cfg.frames));
        }
        first_epoch = loaded->meta.epoch + 1;
        spdlog::info("resuming after epoch {} (step {})", loaded->meta.epoch, loaded->meta.step);
    }

    ToyDecoder model = loaded ? loaded->model : ToyDecoder(model_config(cfg, corpus));
    if (!loaded) {
        model.init(cfg.seed);
    }
    spdlog::info("toy decoder: {} parameters, vocab {}, max_seq_len {}", model.weights().parameter_count(),
                 model.config().vocab.size(), model.config().max_seq_len);

    Trainer trainer(model, trainer_config(cfg), corpus.train);
    if (loaded && loaded->has_optimizer) {
        trainer.optimizer() = loaded->optimizer;
    }

    const json cfg_json = to_json(cfg);
    json echo = {{"config_hash", hash}, {"seed", cfg.seed}, {"run_config", cfg_json}};
    write_text(run_dir / "run_config.json", echo.dump(2) + "\n");

    const std::string provenance = fmt::format("# config_hash={} seed={}\n", hash, cfg.seed);
    if (resume) {
        truncate_csv(curve_path, first_epoch - 1);
        truncate_csv(val_path, first_epoch - 1);
    }
    const bool fresh_curve = !resume || !fs::exists(curve_path);
    const bool fresh_val = !resume || !fs::exists(val_path);
    std::ofstream curve(curve_path, fresh_curve ? std::ios::trunc : std::ios::app);
    std::ofstream val(val_path, fresh_val ? std::ios::trunc : std::ios::app);
    if (!curve || !val) {
        throw DataError("cannot write curve files in " + run_dir.string());
    }
    if (fresh_curve) {
        curve << provenance << "epoch,step,lm,bce,tv,gd,total,lr,w_lm,w_bce,w_tv,w_gd\n";
    }
    if (fresh_val) {
        val << provenance << "epoch";
        for (const auto* k : kMetricKeys) {
            val << ',' << k;
        }
        val << ",frame_acc\n";
    }

    CheckpointMeta meta;
    meta.seed = cfg.seed;
    meta.config_hash = hash;
    meta.run_config = cfg_json.dump();

    TrainSummary summary;
    long last_step = loaded ? loaded->meta.step : 0;
    for (int epoch = first_epoch; epoch <= cfg.epochs; ++epoch) {
        try {
            trainer.run_epoch(epoch, [&](const StepLog& log) {
                const auto& l = log.loss;
                const auto& w = log.weights;
                curve << log.epoch << ',' << log.step << ',' << csv_number(l.lm) << ',' << csv_number(l.bce) << ','
                      << csv_number(l.tv) << ',' << csv_number(l.gd) << ',' << csv_number(l.total) << ','
                      << csv_number(log.lr) << ',' << csv_number(w.lm) << ',' << csv_number(w.bce) << ','
                      << csv_number(w.tv) << ',' << csv_number(w.gd) << '\n';
                last_step = log.step;
            });
        } catch (const NumericError&) {
            curve.flush();
            meta.epoch = epoch - 1;
            meta.step = last_step;
            const fs::path aborted = ckpt_dir / "aborted.ckpt";
            save_checkpoint(aborted, model, &trainer.optimizer(), meta);
            spdlog::error("training aborted; state saved to {}", aborted.string());
            throw;
        }
        curve.flush();

        meta.epoch = epoch;
        meta.step = last_step;
        summary.last_checkpoint = ckpt_dir / checkpoint_name(epoch);
        save_checkpoint(summary.last_checkpoint, model, &trainer.optimizer(), meta);
        summary.last_epoch = epoch;

        if (cfg.eval_every_epoch || epoch == cfg.epochs) {
            if (corpus.val.empty()) {
                spdlog::warn("no validation samples, skipping evaluation");
                continue;
            }
            const auto preds =
                predict_samples(model, corpus.val, cfg.frames, cfg.beams, cfg.constrained, cfg.system_prompt);
            std::vector<PredictionRecord> records;
            std::vector<GroundTruth> gt;
            for (std::size_t i = 0; i < preds.size(); ++i) {
                records.push_back(to_prediction_record(corpus.val[i], preds[i], cfg.frames));
                gt.push_back(to_ground_truth(corpus.val[i]));
            }
            summary.last_val = evaluate(records, gt);
            summary.last_frame_accuracy = frame_accuracy(corpus.val, preds, cfg.frames);
            val << epoch;
            for (const auto* k : kMetricKeys) {
                val << ',' << csv_number(100.0 * summary.last_val->metrics.at(k));
            }
            val << ',' << csv_number(summary.last_frame_accuracy) << '\n';
            val.flush();
            spdlog::info("epoch {}: frame_acc {:.4f} mAP_avg {:.2f} HL_HIT@1 {:.2f}", epoch,
                         summary.last_frame_accuracy, 100.0 * summary.last_val->metrics.at("mAP_avg"),
                         100.0 * summary.last_val->metrics.at("HL_HIT@1"));
        } else {
            spdlog::info("epoch {} done", epoch);
        }
    }
    return summary;
}

// ---------------------------------------------------------------------------

void write_predictions(const fs::path& path, const std::vector<PredictionRecord>& records,
                       const std::string& config_hash, std::uint64_t seed) {
    std::ostringstream out;
    for (const auto& rec : records) {
        auto j = prediction_json(rec);
        j["config_hash"] = config_hash;
        j["seed"] = seed;
        out << j.dump() << '\n';
    }
    write_text(path, out.str());
}

std::vector<PredictionRecord> read_predictions(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open predictions " + path.string());
    }
    std::vector<PredictionRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
        try {
            const json j = json::parse(line);
            PredictionRecord rec;
            rec.qid = j.at("qid").get<std::int64_t>();
            for (const auto& w : j.at("pred_relevant_windows")) {
                if (!w.is_array() || w.size() != 3) {
                    throw ParseError(where + "pred_relevant_windows entries must be [start, end, score]", lineno);
                }
                MomentSpan s{w[0].get<double>(), w[1].get<double>(), w[2].get<double>()};
                if (!(s.end > s.start)) {
                    throw ParseError(where + "window end must exceed start", lineno);
                }
                rec.pred_spans.push_back(s);
            }
            rec.pred_spans = rank_predictions(rec.pred_spans);
            if (j.contains("pred_saliency_scores")) {
                rec.pred_clip_scores = j.at("pred_saliency_scores").get<std::vector<double>>();
            }
            out.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw ParseError(where + e.what(), lineno);
        }
    }
    return out;
}

void cmd_predict(const fs::path& checkpoint, const fs::path& corpus_dir, const fs::path& out,
                 const PredictOptions& options) {
    const LoadedCheckpoint ck = load_checkpoint(checkpoint);
    const RunConfig run = from_json(json::parse(ck.meta.run_config));
    const int frames = ck.model.config().frames;
    if (options.frames && *options.frames != frames) {
        throw DataError("checkpoint was trained with " + std::to_string(frames) + " frames, asked for " +
                        std::to_string(*options.frames));
    }
    const json manifest = read_json(corpus_dir / "manifest.json");
    if (manifest.contains("frames") && manifest["frames"].get<int>() != frames) {
        throw DataError("corpus has " + std::to_string(manifest["frames"].get<int>()) + " frames per sample, checkpoint expects " +
                        std::to_string(frames));
    }
    const auto samples = load_split(corpus_dir, options.split);
    const int beams = options.beams.value_or(run.beams);
    const bool constrained = options.constrained.value_or(run.constrained);
    const auto preds = predict_samples(ck.model, samples, frames, beams, constrained, run.system_prompt);
    std::vector<PredictionRecord> records;
    records.reserve(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        records.push_back(to_prediction_record(samples[i], preds[i], frames));
    }
    write_predictions(out, records, ck.meta.config_hash, ck.meta.seed);
    spdlog::info("predict: {} records -> {}", records.size(), out.string());
}

MetricsReport cmd_score(const fs::path& predictions, const fs::path& ground_truth,
                        const std::optional<fs::path>& out_json, const std::optional<fs::path>& per_query,
                        std::ostream& table) {
    const auto records = read_predictions(predictions);
    const auto loaded = load_qvh_jsonl(ground_truth, true);
    std::vector<GroundTruth> gt;
    gt.reserve(loaded.samples.size());
    for (const auto& s : loaded.samples) {
        gt.push_back(to_ground_truth(s));
    }
    std::vector<PredictionRecord> aligned;
    try {
        aligned = align_by_qid(records, gt);
    } catch (const InvalidInput& e) {
        throw DataError(e.what());
    }
    const MetricsReport report = evaluate(aligned, gt);

    json provenance = json::object();
    {
        std::ifstream in(predictions);
        std::string first;
        if (std::getline(in, first)) {
            const json j = json::parse(first, nullptr, false);
            if (j.is_object() && j.contains("config_hash")) {
                provenance["config_hash"] = j["config_hash"];
                provenance["seed"] = j.value("seed", json());
            }
        }
    }

    json out = json::object();
    table << fmt::format("{:<10} {:>8}\n", "metric", "value");
    for (const auto* k : kMetricKeys) {
        const double pct = 100.0 * report.metrics.at(k);
        out[k] = pct;
        table << fmt::format("{:<10} {:>8.2f}\n", k, pct);
    }
    out["num_queries"] = gt.size();
    for (const auto& [k, v] : provenance.items()) {
        out[k] = v;
    }
    if (out_json) {
        write_text(*out_json, out.dump(2) + "\n");
    }
    if (per_query) {
        std::ostringstream pq;
        for (const auto& q : report.per_query) {
            pq << json{{"qid", q.qid},
                       {"top1_iou", q.top1_iou},
                       {"ap@0.5", q.ap_at_05},
                       {"ap@0.75", q.ap_at_075},
                       {"ap_avg", q.ap_avg},
                       {"hl_ap", q.hl_ap},
                       {"hit@1", q.hit_at_1}}
                      .dump()
               << '\n';
        }
        write_text(*per_query, pq.str());
    }
    return report;
}

DatasetStats cmd_stats(const fs::path& data, int frames, const std::optional<fs::path>& out_json,
                       std::ostream& out) {
    const auto loaded = load_qvh_jsonl(data, false);
    for (const auto& e : loaded.errors) {
        spdlog::warn("{}:{}: {}", data.string(), e.line, e.message);
    }
    const DatasetStats st = dataset_stats(loaded.samples, frames);
    out << fmt::format("samples        {}\n", st.samples);
    out << fmt::format("fg frames      {}\n", st.fg_frames);
    out << fmt::format("bg frames      {}\n", st.bg_frames);
    out << fmt::format("bg:fg ratio    {:.4f} to 1\n", st.bg_fg_ratio);
    out << fmt::format("bg fraction    {:.2f}%\n", 100.0 * st.bg_fraction);
    out << "duration histogram (10 s bins)\n";
    for (const auto& [lo, n] : st.duration_histogram) {
        out << fmt::format("  [{:>4}, {:>4})  {}\n", lo, lo + 10, n);
    }
    if (out_json) {
        json hist = json::object();
        for (const auto& [lo, n] : st.duration_histogram) {
            hist[std::to_string(lo)] = n;
        }
        const json j = {{"samples", st.samples},
                        {"fg_frames", st.fg_frames},
                        {"bg_frames", st.bg_frames},
                        {"bg_fg_ratio", st.bg_fg_ratio},
                        {"bg_fraction", st.bg_fraction},
                        {"frames", frames},
                        {"invalid_records", loaded.errors.size()},
                        {"duration_histogram", hist}};
        write_text(*out_json, j.dump(2) + "\n");
    }
    return st;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
    CLI::App app{"Frame-segmentation moment retrieval toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    std::optional<std::string> config_file;
    std::vector<std::string> overrides;
    std::string log_level = "info";
    app.add_option("--config", config_file, "flat key=value config file");
    app.add_option("--set", overrides, "override one config key (key=value), repeatable");
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    std::string synth_out;
    bool synth_force = false;
    synth->add_option("--out", synth_out, "output corpus directory");
    synth->add_flag("--force", synth_force, "overwrite a non-empty directory");

    auto* train = app.add_subcommand("train", "train the toy decoder");
    std::string train_corpus;
    std::string train_out;
    std::optional<std::string> train_resume;
    bool train_force = false;
    train->add_option("--corpus", train_corpus, "corpus directory");
    train->add_option("--out", train_out, "run directory");
    train->add_option("--resume", train_resume, "checkpoint to resume from");
    train->add_flag("--force", train_force, "overwrite an existing run");

    auto* predict = app.add_subcommand("predict", "decode a corpus split with a checkpoint");
    std::string pred_ckpt;
    std::string pred_corpus;
    std::string pred_out;
    PredictOptions pred_opts;
    bool pred_unconstrained = false;
    predict->add_option("--checkpoint", pred_ckpt, "checkpoint file")->required();
    predict->add_option("--corpus", pred_corpus, "corpus directory")->required();
    predict->add_option("--out", pred_out, "prediction JSONL")->required();
    predict->add_option("--split", pred_opts.split, "train or val")->capture_default_str();
    predict->add_option("--beams", pred_opts.beams, "beam count (default from checkpoint)");
    predict->add_option("--frames", pred_opts.frames, "expected frame count");
    predict->add_flag("--unconstrained", pred_unconstrained, "decode over the whole vocabulary");

    auto* score = app.add_subcommand("score", "score predictions against ground truth");
    std::string score_pred;
    std::string score_gt;
    std::optional<std::string> score_out;
    std::optional<std::string> score_per_query;
    score->add_option("--pred", score_pred, "prediction JSONL")->required();
    score->add_option("--gt", score_gt, "ground-truth JSONL")->required();
    score->add_option("--out", score_out, "metrics JSON");
    score->add_option("--per-query", score_per_query, "per-query breakdown JSONL");

    auto* stats = app.add_subcommand("stats", "dataset statistics");
    std::string stats_data;
    std::optional<std::string> stats_out;
    std::optional<int> stats_frames;
    stats->add_option("--data", stats_data, "JSONL file")->required();
    stats->add_option("--frames", stats_frames, "sampled frames per video (default from config)");
    stats->add_option("--out", stats_out, "statistics JSON");

    auto* prompt = app.add_subcommand("prompt", "print the user prompt");
    std::string prompt_query;
    std::optional<int> prompt_frames;
    bool prompt_system = false;
    prompt->add_option("--query", prompt_query, "query text")->required();
    prompt->add_option("--frames", prompt_frames, "frame count (default from config)");
    prompt->add_flag("--system", prompt_system, "print the system prompt instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (!spdlog::get("frameseg")) {
        spdlog::set_default_logger(spdlog::stderr_color_mt("frameseg"));
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        std::optional<fs::path> cfg_path;
        if (config_file) {
            cfg_path = *config_file;
        }
        RunConfig cfg = resolve_config(cfg_path, overrides);
        if (!synth_out.empty()) {
            cfg.corpus_dir = synth_out;
        }
        if (!train_corpus.empty()) {
            cfg.corpus_dir = train_corpus;
        }
        if (!train_out.empty()) {
            cfg.run_dir = train_out;
        }

        if (*synth) {
            cmd_synth(cfg, cfg.corpus_dir, synth_force);
        } else if (*train) {
            std::optional<fs::path> resume;
            if (train_resume) {
                resume = *train_resume;
            }
            cmd_train(cfg, cfg.corpus_dir, cfg.run_dir, resume, train_force);
        } else if (*predict) {
            if (pred_unconstrained) {
                pred_opts.constrained = false;
            }
            cmd_predict(pred_ckpt, pred_corpus, pred_out, pred_opts);
        } else if (*score) {
            std::optional<fs::path> out;
            std::optional<fs::path> pq;
            if (score_out) {
                out = *score_out;
            }
            if (score_per_query) {
                pq = *score_per_query;
            }
            cmd_score(score_pred, score_gt, out, pq, std::cout);
        } else if (*stats) {
            std::optional<fs::path> out;
            if (stats_out) {
                out = *stats_out;
            }
            cmd_stats(stats_data, stats_frames.value_or(cfg.frames), out, std::cout);
        } else if (*prompt) {
            const int frames = prompt_frames.value_or(cfg.frames);
            if (prompt_system) {
                std::cout << kSystemPrompt;
            } else {
                std::cout << build_prompt(prompt_query, frames);
            }
            std::cout.flush();
        }
    } catch (const NumericError& e) {
        spdlog::error("{}", e.what());
        return kExitNumeric;
    } catch (const InvalidInput& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    } catch (const ParseError& e) {
        spdlog::error("{}", e.what());
        return kExitData;
    } catch (const DataError& e) {
        spdlog::error("{}", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitData;
    }
    return kExitOk;
}

}  // namespace frameseg::cli
