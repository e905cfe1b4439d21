// One PASS/FAIL/SKIP line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "frameseg/data.hpp"
#include "frameseg/losses.hpp"
#include "frameseg/maskcodec.hpp"
#include "frameseg/metrics.hpp"
#include "frameseg/timeline.hpp"
#include "frameseg/training.hpp"
#include "../unit/metric_oracles.hpp"

namespace fs = std::filesystem;
using namespace frameseg;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
    Verdict verdict = Verdict::fail;
    std::string detail;
};

Outcome pass(std::string d) { return {Verdict::pass, std::move(d)}; }
Outcome fail(std::string d) { return {Verdict::fail, std::move(d)}; }
Outcome check(bool ok, std::string d) { return {ok ? Verdict::pass : Verdict::fail, std::move(d)}; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// 1. gradients against central differences

double rel_error(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8}); }

double fd_max_error(const std::function<LossValue(const std::vector<double>&)>& f, std::vector<double> x, double h) {
    const LossValue base = f(x);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x).value;
        x[i] = keep - h;
        const double down = f(x).value;
        x[i] = keep;
        if (!std::isfinite(up) || !std::isfinite(down)) {
            return INFINITY;
        }
        worst = std::max(worst, rel_error(base.grad[i], (up - down) / (2 * h)));
    }
    return worst;
}

Outcome gradient_fidelity() {
    constexpr double h = 1e-6;
    constexpr int points = 25;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> interior(0.05, 0.95);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t batch = 3;
    const std::size_t frames = 6;

    auto seg = [&](const std::vector<double>& labels) {
        return [labels, batch, frames](const std::vector<double>& p) { return SegBatch{batch, frames, p, labels}; };
    };
    double worst_bce = 0.0;
    double worst_tv = 0.0;
    double worst_gd = 0.0;
    double worst_joint = 0.0;
    for (int t = 0; t < points; ++t) {
        std::vector<double> p(batch * frames);
        std::vector<double> y(batch * frames);
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = interior(rng);
            y[i] = static_cast<double>(rng() % 2);
        }
        const auto make = seg(y);
        worst_bce = std::max(worst_bce, fd_max_error([&](const auto& x) { return bce_loss(make(x), kDefaultPosWeight); }, p, h));
        worst_tv = std::max(worst_tv, fd_max_error([&](const auto& x) { return tversky_loss(make(x), 0.3, 0.7); }, p, h));
        worst_gd = std::max(worst_gd, fd_max_error([&](const auto& x) { return generalized_dice_loss(make(x)); }, p, h));

        // All four terms through the two-way softmax of the answer logits.
        const std::size_t vocab = 5;
        const std::size_t rows = batch * (frames + 1);
        std::vector<double> logits(rows * vocab);
        for (auto& z : logits) {
            z = normal(rng);
        }
        std::vector<int> targets;
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t k = 0; k < frames; ++k) {
                targets.push_back(y[b * frames + k] != 0.0 ? 4 : 3);
            }
            targets.push_back(1);
        }
        const LossWeights w{0.4, 0.2, 0.3, 0.1};
        auto joint = [&](const std::vector<double>& z) {
            const auto r = joint_objective(z, vocab, batch, frames, targets, y, 3, 4, w, LossParams{});
            return LossValue{r.parts.total, r.dlogits};
        };
        worst_joint = std::max(worst_joint, fd_max_error(joint, logits, h));
    }
    const double worst = std::max({worst_bce, worst_tv, worst_gd, worst_joint});
    return check(worst <= 1e-5, fmt::format("{} points, max rel err bce {:.2e} tversky {:.2e} gdl {:.2e} combined {:.2e}",
                                            points, worst_bce, worst_tv, worst_gd, worst_joint));
}

// ---------------------------------------------------------------------------
// 2. scalar hand values

Outcome loss_hand_values() {
    auto one = [](std::vector<double> p, std::vector<double> y) {
        return SegBatch{1, p.size(), std::move(p), std::move(y)};
    };
    struct Case {
        const char* name;
        double got;
        double want;
    };
    const std::vector<Case> cases{
        {"bce(0.5,1)", bce_loss(one({0.5}, {1}), kDefaultPosWeight).value, kDefaultPosWeight * std::log(2.0)},
        {"bce(0.5,0)", bce_loss(one({0.5}, {0}), kDefaultPosWeight).value, std::log(2.0)},
        {"bce(p=y)", bce_loss(one({1, 0}, {1, 0}), kDefaultPosWeight).value,
         -(kDefaultPosWeight + 1.0) / 2.0 * std::log1p(-kDefaultEpsilon)},
        {"tversky([1,1],[1,0])", tversky_loss(one({1, 1}, {1, 0}), 0.3, 0.7).value, 1.0 - 1.0 / 1.3},
        {"tversky(p=y)", tversky_loss(one({1, 0, 1}, {1, 0, 1}), 0.3, 0.7).value, 0.0},
        {"tversky(0.5,0.5)=dice", tversky_loss(one({0.7, 0.2}, {1, 0}), 0.5, 0.5).value,
         1.0 - 2 * 0.7 / (2 * 0.7 + 0.2 + 0.3)},
        {"gdl([0.8,0.2],[1,0])", generalized_dice_loss(one({0.8, 0.2}, {1, 0})).value, 0.2},
        {"gdl(p=y)", generalized_dice_loss(one({1, 0}, {1, 0})).value, 0.0},
    };
    double worst = -1.0;
    std::string worst_name;
    for (const auto& c : cases) {
        const double err = std::abs(c.got - c.want);
        if (err > worst) {
            worst = err;
            worst_name = c.name;
        }
    }
    const bool all_background_finite = std::isfinite(generalized_dice_loss(one({0.3, 0.1}, {0, 0})).value);
    return check(worst <= 1e-6 && all_background_finite,
                 fmt::format("{} values, max abs err {:.2e} ({}); gdl example is 1-3.2/4.0 = 0.2, the quoted 0.1111 "
                             "drops one class from the denominator",
                             cases.size(), worst, worst_name));
}

// ---------------------------------------------------------------------------
// 3. codec round trip

Outcome codec_round_trip() {
    std::size_t masks = 0;
    for (const double duration : {150.0, 37.3}) {
        for (int f = 1; f <= 12; ++f) {
            const Timeline tl(duration, kVideoFps, f);
            Bits bits(static_cast<std::size_t>(f));
            for (std::uint32_t code = 0; code < (1u << f); ++code) {
                for (int i = 0; i < f; ++i) {
                    bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((code >> i) & 1u);
                }
                if (moments_to_mask(mask_to_moments(bits, tl), tl) != bits) {
                    return fail(fmt::format("mismatch at f={} mask {} duration {}", f, render_mask(bits), duration));
                }
                ++masks;
            }
        }
    }
    return pass(fmt::format("{} masks, f=1..12, two durations", masks));
}

// ---------------------------------------------------------------------------
// 4. golden prompt and answer

Outcome golden_prompt_and_mask() {
    const std::string want = slurp(fs::path(FRAMESEG_FIXTURES) / "golden_prompt_f25.txt");
    const std::string got = build_prompt("Man in baseball cap eats before doing his interview.", 25);
    const std::string mask_text = slurp(fs::path(FRAMESEG_FIXTURES) / "golden_answer_mask.txt");
    const FrameMask mask = parse_mask(mask_text, 25, ParseMode::strict);
    const auto spans = mask_to_moments(mask.bits, Timeline(150.0, kVideoFps, 25));
    const std::vector<MomentSpan> expect{{72.0, 132.0, {}}, {138.0, 144.0, {}}};
    const bool spans_ok = spans.size() == 2 && std::abs(spans[0].start - 72) < 1e-9 &&
                          std::abs(spans[0].end - 132) < 1e-9 && std::abs(spans[1].start - 138) < 1e-9 &&
                          std::abs(spans[1].end - 144) < 1e-9;
    std::string span_text;
    for (const auto& s : spans) {
        span_text += fmt::format("[{},{}]", s.start, s.end);
    }
    return check(got == want && spans_ok,
                 fmt::format("prompt {} ({} bytes), mask -> {}", got == want ? "byte-identical" : "DIFFERS",
                             got.size(), span_text));
}

// ---------------------------------------------------------------------------
// 5. metric oracles

Outcome metric_oracles() {
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> u(0, 1);
    double worst_ap = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n_gt = 1 + static_cast<int>(rng() % 4);
        const int n_pred = 1 + static_cast<int>(rng() % 8);
        const auto gt = oracle::disjoint_spans(rng, n_gt, 60);
        std::vector<MomentSpan> preds;
        for (int p = 0; p < n_pred; ++p) {
            const auto& g = gt[rng() % gt.size()];
            const double s = std::max(0.0, g.start + (u(rng) - 0.5) * g.length());
            preds.push_back({s, s + g.length() * (0.5 + u(rng)), u(rng)});
        }
        for (const double thr : avg_map_thresholds()) {
            const double greedy = average_precision_detection(rank_predictions(preds), gt, thr);
            worst_ap = std::max(worst_ap, std::abs(greedy - oracle::optimal_ap(preds, gt, thr)));
        }
    }
    double worst_hl = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 40;
        std::vector<double> scores(n);
        std::vector<std::uint8_t> pos(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = static_cast<double>(rng() % 9) / 9.0;
            pos[i] = static_cast<std::uint8_t>(rng() % 3 == 0);
        }
        worst_hl = std::max(worst_hl, std::abs(ranked_average_precision(scores, pos) - oracle::ranked_ap_oracle(scores, pos)));
    }
    return check(worst_ap <= 1e-9 && worst_hl <= 1e-9,
                 fmt::format("200 detection instances x 10 thresholds max diff {:.1e}; 200 ranked instances max diff "
                             "{:.1e}",
                             worst_ap, worst_hl));
}

// ---------------------------------------------------------------------------
// 6. objective accounting

ToyDecoder tiny_model(const std::vector<VideoSample>& samples, int frames) {
    ToyModelConfig cfg;
    cfg.d_model = 16;
    cfg.n_heads = 2;
    cfg.frame_feature_dim = static_cast<int>(samples.front().variants.front().cols);
    cfg.frames = frames;
    cfg.vocab = Vocab::build(vocabulary_texts(samples, frames, false));
    std::size_t longest = 0;
    for (const auto& s : samples) {
        longest = std::max(longest, make_prompt_input(cfg.vocab, s.query, s.variants[0], frames, false).length());
    }
    cfg.max_seq_len = static_cast<int>(longest) + frames + 1;
    ToyDecoder m(cfg);
    m.init(11);
    return m;
}

Outcome objective_accounting() {
    SynthConfig sc;
    sc.n_samples = 24;
    sc.frames = 6;
    sc.duration = 36;
    sc.feature_dim = 8;
    sc.seed = 3;
    const auto corpus = synth_generate(sc);

    ToyDecoder model = tiny_model(corpus.train, sc.frames);
    TrainerConfig tc;
    tc.epochs = 5;
    tc.warmup_epochs = 3;
    tc.batch_size = 4;
    tc.grad_accum = 2;
    tc.lr = 3e-3;
    tc.frames = sc.frames;
    Trainer trainer(model, tc, corpus.train);
    double worst = 0.0;
    long steps = 0;
    for (int e = 1; e <= tc.epochs; ++e) {
        trainer.run_epoch(e, [&](const StepLog& log) {
            const auto& l = log.loss;
            worst = std::max(worst, std::abs(combined_loss(l.lm, l.bce, l.tv, l.gd, log.weights) - l.total));
            ++steps;
        });
    }

    ToyDecoder a = tiny_model(corpus.train, sc.frames);
    ToyDecoder b = a;
    std::vector<TrainExample> ex;
    for (const auto& s : corpus.train) {
        ex.push_back(make_train_example(a.config().vocab, s, s.variants[0], sc.frames, false));
    }
    AdamW oa(a.weights(), AdamWConfig{});
    AdamW ob(b.weights(), AdamWConfig{});
    for (std::size_t off = 0; off + 8 <= ex.size(); off += 8) {
        const std::vector<std::span<const TrainExample>> micro{std::span(ex).subspan(off, 4),
                                                               std::span(ex).subspan(off + 4, 4)};
        (void)train_step(a, oa, micro, LossWeights{1, 0, 0, 0}, LossParams{}, 3e-3);
        (void)lm_train_step(b, ob, micro, 3e-3);
    }
    bool identical = true;
    std::vector<const Matrix*> wb;
    b.weights().visit([&](const std::string&, const Matrix& m) { wb.push_back(&m); });
    std::size_t i = 0;
    a.weights().visit([&](const std::string&, const Matrix& m) { identical = identical && (m == *wb[i++]); });
    return check(worst <= 1e-9 && identical,
                 fmt::format("{} steps, max |sum w*parts - total| {:.1e}; lm-only updates {}", steps, worst,
                             identical ? "bit-identical" : "DIFFER"));
}

// ---------------------------------------------------------------------------
// 7, 8. toy run through the command-line tool

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) {
            cells.push_back(c);
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw std::runtime_error("csv column " + name + " missing");
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "frameseg");
    std::vector<char*> argv;
    for (auto& a : args) {
        argv.push_back(a.data());
    }
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

constexpr int kToyEpochs = 30;
constexpr int kToyWarmup = 6;

std::vector<std::string> toy_settings() {
    const std::vector<std::string> kv{"n_samples=500", "n_val=100",     "frames=10",    "duration=60",
                                      "noise_std=0.05", "d_model=32",   "lr=0.003",     "batch_size=16",
                                      "grad_accum=1",  "seed=7",        fmt::format("epochs={}", kToyEpochs),
                                      fmt::format("warmup_epochs={}", kToyWarmup)};
    std::vector<std::string> out;
    for (const auto& s : kv) {
        out.push_back("--set");
        out.push_back(s);
    }
    out.push_back("--log-level");
    out.push_back("warn");
    return out;
}

struct ToyRun {
    bool ok = false;
    std::string error;
    fs::path run_dir;
    double seconds = 0.0;
};

ToyRun toy_train(const fs::path& work, const std::string& name) {
    ToyRun r;
    const fs::path corpus = work / "corpus";
    r.run_dir = work / name;
    auto settings = toy_settings();
    if (!fs::exists(corpus / "manifest.json")) {
        std::vector<std::string> synth{"synth", "--out", corpus.string(), "--force"};
        synth.insert(synth.end(), settings.begin(), settings.end());
        if (run_cli(synth) != 0) {
            r.error = "synth failed";
            return r;
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> train{"train", "--corpus", corpus.string(), "--out", r.run_dir.string(), "--force"};
    train.insert(train.end(), settings.begin(), settings.end());
    const int code = run_cli(train);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.ok = code == 0;
    if (!r.ok) {
        r.error = fmt::format("train exited with {}", code);
    }
    return r;
}

Outcome toy_learning(const ToyRun& a, const ToyRun& b) {
    if (!a.ok) {
        return fail(a.error);
    }
    const auto rows = read_csv(a.run_dir / "val_metrics.csv");
    if (rows.size() < 2) {
        return fail("no validation rows");
    }
    const auto& header = rows.front();
    const auto& last = rows.back();
    const double acc = std::stod(last[column(header, "frame_acc")]);
    const double map = std::stod(last[column(header, "mAP_avg")]) / 100.0;
    const double hit = std::stod(last[column(header, "HL_HIT@1")]) / 100.0;
    const int epochs = std::stoi(last[0]);
    const bool deterministic = b.ok && slurp(a.run_dir / "curve.csv") == slurp(b.run_dir / "curve.csv") &&
                               slurp(a.run_dir / "val_metrics.csv") == slurp(b.run_dir / "val_metrics.csv");
    const bool ok = acc >= 0.90 && map >= 0.50 && hit >= 0.80 && epochs <= 30 && a.seconds < 15 * 60 && deterministic;
    return check(ok, fmt::format("epoch {}: frame acc {:.4f}, avg mAP {:.4f}, HIT@1 {:.4f}, {:.0f} s; repeat run {}",
                                 epochs, acc, map, hit, a.seconds,
                                 deterministic ? "byte-identical" : "DIFFERS"));
}

Outcome complementary_signal(const ToyRun& a) {
    if (!a.ok) {
        return fail(a.error);
    }
    const auto rows = read_csv(a.run_dir / "curve.csv");
    const auto& header = rows.front();
    const auto c_epoch = column(header, "epoch");
    const auto c_lm = column(header, "lm");
    const auto c_tv = column(header, "tv");
    constexpr double decay = 0.95;
    double ema_lm = 0.0;
    double ema_tv = 0.0;
    bool primed = false;
    std::vector<std::pair<double, double>> at_epoch_end;  // index epoch-1
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const int epoch = std::stoi(rows[r][c_epoch]);
        const double lm = std::stod(rows[r][c_lm]);
        const double tv = std::stod(rows[r][c_tv]);
        ema_lm = primed ? decay * ema_lm + (1 - decay) * lm : lm;
        ema_tv = primed ? decay * ema_tv + (1 - decay) * tv : tv;
        primed = true;
        if (static_cast<std::size_t>(epoch) > at_epoch_end.size()) {
            at_epoch_end.resize(static_cast<std::size_t>(epoch));
        }
        at_epoch_end[static_cast<std::size_t>(epoch) - 1] = {ema_lm, ema_tv};
    }
    const int last = static_cast<int>(at_epoch_end.size());
    int plateau = 0;
    for (int e = kToyWarmup + 2; e <= last; ++e) {
        const double prev = at_epoch_end[static_cast<std::size_t>(e) - 2].first;
        const double cur = at_epoch_end[static_cast<std::size_t>(e) - 1].first;
        if (std::abs(cur - prev) / std::abs(prev) < 0.01) {
            plateau = e;
            break;
        }
    }
    if (plateau == 0) {
        return fail(fmt::format("language-model EMA never changes by less than 1% per epoch after epoch {}",
                                kToyWarmup + 1));
    }
    const double tv_plateau = at_epoch_end[static_cast<std::size_t>(plateau) - 1].second;
    const double tv_final = at_epoch_end.back().second;
    return check(tv_final < tv_plateau,
                 fmt::format("lm EMA plateaus at epoch {}; tversky EMA {:.4e} there, {:.4e} at epoch {}", plateau,
                             tv_plateau, tv_final, last));
}

// ---------------------------------------------------------------------------
// 9. real-data statistics

Outcome real_data_stats() {
    const char* train_env = std::getenv("QVH_TRAIN_JSONL");
    const char* val_env = std::getenv("QVH_VAL_JSONL");
    if (train_env == nullptr || val_env == nullptr) {
        return {Verdict::skip, "QVH_TRAIN_JSONL / QVH_VAL_JSONL not set"};
    }
    const auto train = load_qvh_jsonl(train_env);
    const auto val = load_qvh_jsonl(val_env);
    const auto stats = dataset_stats(train.samples, 25);
    const bool ok = train.samples.size() == 7218 && val.samples.size() == 1550 &&
                    std::abs(stats.bg_fg_ratio - 2.3378) <= 0.005 && std::abs(100 * stats.bg_fraction - 70.04) <= 0.1;
    return check(ok, fmt::format("train {} (errors {}), val {} (errors {}), bg:fg {:.4f}, bg {:.2f}%",
                                 train.samples.size(), train.errors.size(), val.samples.size(), val.errors.size(),
                                 stats.bg_fg_ratio, 100 * stats.bg_fraction));
}

// ---------------------------------------------------------------------------
// 10. schedules

Outcome schedule_pins() {
    const auto s = default_start_weights();
    const auto e = default_end_weights();
    const auto w1 = weight_schedule(1, 6, s, e);
    const auto w7 = weight_schedule(7, 6, s, e);
    const bool weights_ok = w1 == LossWeights{1.0, 0.0, 0.0, 0.0} && w7 == LossWeights{0.2, 0.2667, 0.2667, 0.2667};
    const long per_epoch = 452;
    const long total = 11 * per_epoch;
    const long warm = 6 * per_epoch;
    const double l0 = lr_schedule(0, total, warm, 2e-5);
    const double lw = lr_schedule(warm, total, warm, 2e-5);
    const double lt = lr_schedule(total, total, warm, 2e-5);
    return check(weights_ok && l0 == 0.0 && lw == 2e-5 && lt == 0.0,
                 fmt::format("w(1)=({},{},{},{}) w(7)=({},{},{},{}); lr {} -> {} -> {}", w1.lm, w1.bce, w1.tv, w1.gd,
                             w7.lm, w7.bce, w7.tv, w7.gd, l0, lw, lt));
}

}  // namespace

int main(int argc, char** argv) {
    fs::path work = fs::temp_directory_path() / "frameseg_acceptance";
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--workdir") {
            work = argv[i + 1];
        }
    }
    fs::create_directories(work);
    spdlog::set_level(spdlog::level::warn);

    struct Item {
        int id;
        const char* name;
        std::function<Outcome()> fn;
    };
    ToyRun first;
    ToyRun second;
    const std::vector<Item> items{
        {1, "gradient fidelity", gradient_fidelity},
        {2, "loss hand values", loss_hand_values},
        {3, "codec exhaustive round trip", codec_round_trip},
        {4, "golden prompt and answer", golden_prompt_and_mask},
        {5, "metric oracle equivalence", metric_oracles},
        {6, "objective accounting", objective_accounting},
        {7, "toy end-to-end learning",
         [&] {
             first = toy_train(work, "run_a");
             second = toy_train(work, "run_b");
             return toy_learning(first, second);
         }},
        {8, "complementary signal", [&] { return complementary_signal(first); }},
        {9, "real-data statistics", real_data_stats},
        {10, "schedule pins", schedule_pins},
    };

    int failures = 0;
    for (const auto& item : items) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = item.fn();
        } catch (const std::exception& e) {
            out = fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const char* tag = out.verdict == Verdict::pass ? "PASS" : out.verdict == Verdict::skip ? "SKIP" : "FAIL";
        failures += static_cast<int>(out.verdict == Verdict::fail);
        std::cout << fmt::format("[{}] {:>2} {}: {} ({:.1f} s)", tag, item.id, item.name, out.detail, secs)
                  << std::endl;
    }
    std::cout << fmt::format("{} criteria, {} failed", items.size(), failures) << std::endl;
    return failures == 0 ? 0 : 1;
}
