#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "frameseg/data.hpp"
#include "frameseg/losses.hpp"
#include "frameseg/metrics.hpp"
#include "frameseg/model.hpp"

namespace frameseg {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.005;
};

/// Adam with decoupled weight decay. Decay applies to matrices only; biases,
/// layer-norm parameters and other single-row tensors are not decayed.
class AdamW {
public:
    AdamW() = default;
    AdamW(const Weights& like, AdamWConfig config);

    void step(Weights& params, const Weights& grads, double lr);

    [[nodiscard]] const AdamWConfig& config() const noexcept { return config_; }
    [[nodiscard]] long steps() const noexcept { return steps_; }
    void set_steps(long steps) noexcept { steps_ = steps; }
    [[nodiscard]] Weights& first_moment() noexcept { return m_; }
    [[nodiscard]] Weights& second_moment() noexcept { return v_; }
    [[nodiscard]] const Weights& first_moment() const noexcept { return m_; }
    [[nodiscard]] const Weights& second_moment() const noexcept { return v_; }

private:
    AdamWConfig config_;
    Weights m_;
    Weights v_;
    long steps_ = 0;
};

/// Runs the joint objective on one micro-batch and adds scale * d(total)/d(weights) to `grads`.
LossBreakdown accumulate_gradients(const ToyDecoder& model, std::span<const TrainExample> batch,
                                   const LossWeights& weights, const LossParams& params, double scale,
                                   Weights& grads);

/// Plain language-model fine-tuning: cross-entropy on the answer positions only.
double accumulate_lm_gradients(const ToyDecoder& model, std::span<const TrainExample> batch, double scale,
                               Weights& grads);

/// One optimizer update over `micro_batches`, each contributing equally.
/// The returned breakdown is the mean over micro-batches.
/// Throws NumericError naming the component when a loss is not finite.
LossBreakdown train_step(ToyDecoder& model, AdamW& optimizer, std::span<const std::span<const TrainExample>> micro_batches,
                         const LossWeights& weights, const LossParams& params, double lr);

/// Same update driven only by the language-model loss.
double lm_train_step(ToyDecoder& model, AdamW& optimizer, std::span<const std::span<const TrainExample>> micro_batches,
                     double lr);

struct TrainerConfig {
    int epochs = 11;
    int warmup_epochs = 6;
    int batch_size = 16;
    int grad_accum = 4;
    double lr = 2e-5;
    AdamWConfig adamw;
    LossParams loss;
    LossWeights start_weights = default_start_weights();
    LossWeights end_weights = default_end_weights();
    int frames = 25;
    bool system_prompt = false;
    std::uint64_t seed = 7;

    void validate() const;
};

struct StepLog {
    int epoch = 0;
    long step = 0;  // 1-based optimizer step across the whole run
    LossBreakdown loss;
    double lr = 0.0;
    LossWeights weights;
};

/// Epoch loop over a fixed training set. Shuffling and the neighbour-frame
/// variant of each sample depend only on (seed, epoch), so an epoch can be
/// replayed from a checkpoint without any saved random state.
class Trainer {
public:
    Trainer(ToyDecoder& model, TrainerConfig config, const std::vector<VideoSample>& train);

    [[nodiscard]] long steps_per_epoch() const noexcept;
    [[nodiscard]] long total_steps() const noexcept;
    [[nodiscard]] const TrainerConfig& config() const noexcept { return config_; }
    [[nodiscard]] AdamW& optimizer() noexcept { return optimizer_; }
    [[nodiscard]] const AdamW& optimizer() const noexcept { return optimizer_; }

    /// Trains one epoch (1-based) and reports every optimizer step.
    void run_epoch(int epoch, const std::function<void(const StepLog&)>& on_step);

    /// Sample order used in `epoch`.
    [[nodiscard]] std::vector<std::size_t> epoch_order(int epoch) const;

private:
    ToyDecoder& model_;
    TrainerConfig config_;
    const std::vector<VideoSample>& train_;
    AdamW optimizer_;
};

/// Constrained beam decode of every sample using its middle variant.
struct SamplePrediction {
    std::int64_t qid = 0;
    std::string mask;
    std::vector<double> probs;
    double score = 0.0;
};

std::vector<SamplePrediction> predict_samples(const ToyDecoder& model, const std::vector<VideoSample>& samples,
                                              int frames, int n_beams, bool constrained, bool system_prompt);

/// Spans with mean-probability confidences and interpolated 2-second clip
/// scores for one decoded sample. Masks that fail strict parsing are read leniently.
PredictionRecord to_prediction_record(const VideoSample& sample, const SamplePrediction& pred, int frames);

GroundTruth to_ground_truth(const VideoSample& sample);

/// Fraction of frames whose decoded bit equals the ground-truth label.
double frame_accuracy(const std::vector<VideoSample>& samples, const std::vector<SamplePrediction>& preds, int frames);

}  // namespace frameseg
