#include "frameseg/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "frameseg/error.hpp"
#include "frameseg/timeline.hpp"

namespace frameseg {

namespace {

struct MicroForward {
    std::vector<Tape> tapes;
    std::vector<double> logits;  // batch * (frames + 1) rows of vocab
    std::vector<int> targets;
    std::vector<double> labels;
};

MicroForward forward_answers(const ToyDecoder& model, std::span<const TrainExample> batch) {
    if (batch.empty()) {
        throw InvalidInput("empty micro-batch");
    }
    const int frames = batch.front().input.frames;
    MicroForward out;
    out.tapes.resize(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& ex = batch[b];
        if (ex.input.frames != frames) {
            throw InvalidInput("micro-batch mixes frame counts");
        }
        const auto positions = ex.input.answer_positions();
        if (ex.targets.size() != positions.size() || ex.labels.size() != static_cast<std::size_t>(frames) ||
            positions.back() >= ex.input.length()) {
            throw InvalidInput("training example for " + std::to_string(b) + " lacks answer tokens or labels");
        }
        const Matrix logits = model.forward(ex.input, positions, &out.tapes[b]);
        out.logits.insert(out.logits.end(), logits.data(), logits.data() + logits.size());
        out.targets.insert(out.targets.end(), ex.targets.begin(), ex.targets.end());
        for (const auto bit : ex.labels) {
            out.labels.push_back(bit != 0 ? 1.0 : 0.0);
        }
    }
    return out;
}

void backward_answers(const ToyDecoder& model, const MicroForward& fwd, std::span<const double> dlogits, double scale,
                      Weights& grads) {
    const auto vocab = static_cast<Eigen::Index>(model.config().vocab.size());
    std::size_t offset = 0;
    for (const auto& tape : fwd.tapes) {
        const auto rows = static_cast<Eigen::Index>(tape.rows.size());
        Matrix d = Eigen::Map<const Matrix>(dlogits.data() + offset, rows, vocab) * scale;
        model.backward(tape, d, grads);
        offset += static_cast<std::size_t>(rows * vocab);
    }
}

void check_finite(const LossBreakdown& loss) {
    const std::pair<const char*, double> parts[] = {
        {"lm", loss.lm}, {"bce", loss.bce}, {"tversky", loss.tv}, {"generalized dice", loss.gd}, {"total", loss.total}};
    for (const auto& [name, value] : parts) {
        if (!std::isfinite(value)) {
            throw NumericError(std::string("non-finite ") + name + " loss (" + std::to_string(value) + ")");
        }
    }
}

void check_finite(const Weights& grads) {
    grads.visit([](const std::string& name, const Matrix& m) {
        if (!m.allFinite()) {
            throw NumericError("non-finite gradient in " + name);
        }
    });
}

}  // namespace

AdamW::AdamW(const Weights& like, AdamWConfig config)
    : config_(config), m_(like.zeros_like()), v_(like.zeros_like()) {}

void AdamW::step(Weights& params, const Weights& grads, double lr) {
    ++steps_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));

    std::vector<Matrix*> p;
    std::vector<const Matrix*> g;
    std::vector<Matrix*> m;
    std::vector<Matrix*> v;
    params.visit([&](const std::string&, Matrix& x) { p.push_back(&x); });
    grads.visit([&](const std::string&, const Matrix& x) { g.push_back(&x); });
    m_.visit([&](const std::string&, Matrix& x) { m.push_back(&x); });
    v_.visit([&](const std::string&, Matrix& x) { v.push_back(&x); });
    if (p.size() != g.size() || p.size() != m.size()) {
        throw InvalidInput("AdamW: parameter and state layouts differ");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto& P = *p[i];
        const auto& G = *g[i];
        auto& M = *m[i];
        auto& V = *v[i];
        if (P.rows() > 1 && config_.weight_decay != 0.0) {
            P *= 1.0 - lr * config_.weight_decay;
        }
        M = b1 * M + (1.0 - b1) * G;
        V = b2 * V + (1.0 - b2) * G.cwiseAbs2();
        P.array() -= lr * (M.array() / c1) / ((V.array() / c2).sqrt() + config_.epsilon);
    }
}

LossBreakdown accumulate_gradients(const ToyDecoder& model, std::span<const TrainExample> batch,
                                   const LossWeights& weights, const LossParams& params, double scale,
                                   Weights& grads) {
    const MicroForward fwd = forward_answers(model, batch);
    const auto& vocab = model.config().vocab;
    const ObjectiveResult obj =
        joint_objective(fwd.logits, vocab.size(), batch.size(), static_cast<std::size_t>(batch.front().input.frames),
                        fwd.targets, fwd.labels, vocab.zero_id(), vocab.one_id(), weights, params);
    check_finite(obj.parts);
    backward_answers(model, fwd, obj.dlogits, scale, grads);
    return obj.parts;
}

double accumulate_lm_gradients(const ToyDecoder& model, std::span<const TrainExample> batch, double scale,
                               Weights& grads) {
    const MicroForward fwd = forward_answers(model, batch);
    const LossValue lm = lm_loss(fwd.logits, model.config().vocab.size(), fwd.targets);
    if (!std::isfinite(lm.value)) {
        throw NumericError("non-finite lm loss");
    }
    backward_answers(model, fwd, lm.grad, scale, grads);
    return lm.value;
}

LossBreakdown train_step(ToyDecoder& model, AdamW& optimizer,
                         std::span<const std::span<const TrainExample>> micro_batches, const LossWeights& weights,
                         const LossParams& params, double lr) {
    if (micro_batches.empty()) {
        throw InvalidInput("train_step: no micro-batches");
    }
    Weights grads = model.weights().zeros_like();
    const double scale = 1.0 / static_cast<double>(micro_batches.size());
    LossBreakdown mean;
    for (const auto& micro : micro_batches) {
        const LossBreakdown part = accumulate_gradients(model, micro, weights, params, scale, grads);
        mean.lm += part.lm * scale;
        mean.bce += part.bce * scale;
        mean.tv += part.tv * scale;
        mean.gd += part.gd * scale;
        mean.total += part.total * scale;
    }
    check_finite(grads);
    optimizer.step(model.weights(), grads, lr);
    return mean;
}

double lm_train_step(ToyDecoder& model, AdamW& optimizer, std::span<const std::span<const TrainExample>> micro_batches,
                     double lr) {
    if (micro_batches.empty()) {
        throw InvalidInput("lm_train_step: no micro-batches");
    }
    Weights grads = model.weights().zeros_like();
    const double scale = 1.0 / static_cast<double>(micro_batches.size());
    double mean = 0.0;
    for (const auto& micro : micro_batches) {
        mean += accumulate_lm_gradients(model, micro, scale, grads) * scale;
    }
    check_finite(grads);
    optimizer.step(model.weights(), grads, lr);
    return mean;
}

// ---------------------------------------------------------------------------

void TrainerConfig::validate() const {
    if (epochs < 1 || warmup_epochs < 1 || batch_size < 1 || grad_accum < 1) {
        throw InvalidInput("epochs, warmup_epochs, batch_size and grad_accum must be positive");
    }
    if (!(lr > 0.0) || !std::isfinite(lr)) {
        throw InvalidInput("learning rate must be positive");
    }
    if (frames < 1) {
        throw InvalidInput("frames must be positive");
    }
    if (adamw.weight_decay < 0.0) {
        throw InvalidInput("weight decay must be non-negative");
    }
    loss.validate();
}

Trainer::Trainer(ToyDecoder& model, TrainerConfig config, const std::vector<VideoSample>& train)
    : model_(model), config_(std::move(config)), train_(train), optimizer_(model.weights(), config_.adamw) {
    config_.validate();
    if (train_.empty()) {
        throw DataError("training set is empty");
    }
    if (model_.config().frames != config_.frames) {
        throw InvalidInput("model built for " + std::to_string(model_.config().frames) + " frames, trainer uses " +
                           std::to_string(config_.frames));
    }
}

long Trainer::steps_per_epoch() const noexcept {
    const auto per_step = static_cast<std::size_t>(config_.batch_size) * static_cast<std::size_t>(config_.grad_accum);
    return static_cast<long>((train_.size() + per_step - 1) / per_step);
}

long Trainer::total_steps() const noexcept { return steps_per_epoch() * config_.epochs; }

std::vector<std::size_t> Trainer::epoch_order(int epoch) const {
    std::vector<std::size_t> order(train_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(config_.seed), static_cast<std::uint32_t>(config_.seed >> 32),
                      static_cast<std::uint32_t>(epoch), 0x51u};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

void Trainer::run_epoch(int epoch, const std::function<void(const StepLog&)>& on_step) {
    if (epoch < 1 || epoch > config_.epochs) {
        throw InvalidInput("epoch " + std::to_string(epoch) + " outside 1.." + std::to_string(config_.epochs));
    }
    const auto& vocab = model_.config().vocab;
    const LossWeights weights =
        weight_schedule(epoch, config_.warmup_epochs, config_.start_weights, config_.end_weights);
    const auto order = epoch_order(epoch);
    const long per_epoch = steps_per_epoch();
    const long total = total_steps();
    const long warmup = std::min<long>(per_epoch * config_.warmup_epochs, total);
    const auto batch = static_cast<std::size_t>(config_.batch_size);
    const auto per_step = batch * static_cast<std::size_t>(config_.grad_accum);

    for (long s = 0; s < per_epoch; ++s) {
        const std::size_t begin = static_cast<std::size_t>(s) * per_step;
        const std::size_t end = std::min(begin + per_step, order.size());
        std::vector<TrainExample> examples;
        examples.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            const auto& sample = train_[order[i]];
            std::seed_seq seq{static_cast<std::uint32_t>(config_.seed), static_cast<std::uint32_t>(epoch),
                              static_cast<std::uint32_t>(sample.qid), 0x7au};
            std::mt19937_64 rng(seq);
            const Features& feats = variation_pick(sample, Variation::random, rng);
            examples.push_back(make_train_example(vocab, sample, feats, config_.frames, config_.system_prompt));
        }
        std::vector<std::span<const TrainExample>> micro;
        for (std::size_t off = 0; off < examples.size(); off += batch) {
            micro.emplace_back(examples.data() + off, std::min(batch, examples.size() - off));
        }

        StepLog log;
        log.epoch = epoch;
        log.step = static_cast<long>(epoch - 1) * per_epoch + s + 1;
        log.lr = lr_schedule(std::min(log.step, total), total, warmup, config_.lr);
        log.weights = weights;
        try {
            log.loss = train_step(model_, optimizer_, micro, weights, config_.loss, log.lr);
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", step " +
                               std::to_string(log.step) + " (batch " + std::to_string(s) + " of the epoch)");
        }
        if (on_step) {
            on_step(log);
        }
    }
}

// ---------------------------------------------------------------------------

std::vector<SamplePrediction> predict_samples(const ToyDecoder& model, const std::vector<VideoSample>& samples,
                                              int frames, int n_beams, bool constrained, bool system_prompt) {
    std::vector<SamplePrediction> out;
    out.reserve(samples.size());
    std::mt19937_64 unused(0);
    for (const auto& sample : samples) {
        const Features& feats = variation_pick(sample, Variation::middle, unused);
        const InterleavedInput prompt =
            make_prompt_input(model.config().vocab, sample.query, feats, frames, system_prompt);
        DecodeResult r = beam_decode(model, prompt, n_beams, constrained);
        out.push_back({sample.qid, std::move(r.text), std::move(r.probs), r.score});
    }
    return out;
}

PredictionRecord to_prediction_record(const VideoSample& sample, const SamplePrediction& pred, int frames) {
    FrameMask mask;
    try {
        mask = parse_mask(pred.mask, frames, ParseMode::strict);
    } catch (const ParseError& e) {
        spdlog::debug("qid {}: mask '{}' rejected ({}), parsing leniently", sample.qid, pred.mask, e.what());
        mask = parse_mask(pred.mask, frames, ParseMode::lenient);
    }
    const Timeline tl(sample.duration, kVideoFps, frames);
    PredictionRecord rec;
    rec.qid = sample.qid;
    const auto spans = mask_to_moments(mask.bits, tl);
    rec.pred_spans = score_spans(spans, pred.probs, tl);
    const auto times = clip_query_times(sample.duration, kClipSeconds);
    rec.pred_clip_scores = interpolate_scores(pred.probs, tl, times);
    return rec;
}

GroundTruth to_ground_truth(const VideoSample& sample) {
    return {sample.qid, sample.gt_spans, sample.gt_clip_saliency};
}

double frame_accuracy(const std::vector<VideoSample>& samples, const std::vector<SamplePrediction>& preds, int frames) {
    if (samples.size() != preds.size() || samples.empty()) {
        throw InvalidInput("frame_accuracy: need one prediction per sample");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Bits labels = sample_labels(samples[i], frames);
        const FrameMask mask = parse_mask(preds[i].mask, frames, ParseMode::lenient);
        for (int k = 0; k < frames; ++k) {
            correct += static_cast<std::size_t>(labels[static_cast<std::size_t>(k)] == mask.bits[static_cast<std::size_t>(k)]);
        }
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size() * static_cast<std::size_t>(frames));
}

}  // namespace frameseg
