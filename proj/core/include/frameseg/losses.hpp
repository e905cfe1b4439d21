#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace frameseg {

inline constexpr double kDefaultEpsilon = 1e-6;
inline constexpr double kDefaultPosWeight = 2.3378;
inline constexpr double kDefaultTverskyBeta = 0.7;

/// Foreground probabilities and binary labels, row-major batch x frames.
struct SegBatch {
    std::size_t batch = 0;
    std::size_t frames = 0;
    std::vector<double> probs;
    std::vector<double> labels;

    [[nodiscard]] std::size_t size() const noexcept { return batch * frames; }
    // Throws InvalidInput on shape mismatch, probabilities outside [0,1] or non-binary labels.
    void validate() const;
};

struct LossWeights {
    double lm = 1.0;
    double bce = 0.0;
    double tv = 0.0;
    double gd = 0.0;

    friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct LossParams {
    double pos_weight = kDefaultPosWeight;
    double alpha = 1.0 - kDefaultTverskyBeta;
    double beta = kDefaultTverskyBeta;
    double epsilon = kDefaultEpsilon;

    void validate() const;
};

/// A scalar loss together with its gradient with respect to the inputs it
/// was evaluated on (probabilities for the segmentation losses, logits for
/// the language-model loss).
struct LossValue {
    double value = 0.0;
    std::vector<double> grad;
};

struct LossBreakdown {
    double lm = 0.0;
    double bce = 0.0;
    double tv = 0.0;
    double gd = 0.0;
    double total = 0.0;
};

/// Mean positive-weighted binary cross-entropy; probabilities are clamped to
/// [eps, 1 - eps] before taking logs.
LossValue bce_loss(const SegBatch& batch, double pos_weight, double epsilon = kDefaultEpsilon);

/// 1 - (TP + eps) / (TP + alpha FP + beta FN + eps) over soft counts summed
/// across the whole batch.
LossValue tversky_loss(const SegBatch& batch, double alpha, double beta, double epsilon = kDefaultEpsilon);

/// Two-class (background, foreground) generalized Dice loss over the whole
/// batch, class weights 1 / (label volume + eps)^2.
LossValue generalized_dice_loss(const SegBatch& batch, double epsilon = kDefaultEpsilon);

/// Mean token cross-entropy. `logits` is row-major positions x vocab and only
/// holds supervised positions.
LossValue lm_loss(std::span<const double> logits, std::size_t vocab, std::span<const int> targets);

double combined_loss(double lm, double bce, double tv, double gd, const LossWeights& w) noexcept;

/// Linear ramp from `start` at epoch 1 to `end` at epoch warmup_epochs + 1,
/// then held at `end`.
LossWeights weight_schedule(int epoch, int warmup_epochs, const LossWeights& start, const LossWeights& end);

/// Loss weights used in training: (1,0,0,0) ramping to (0.2, 0.2667, 0.2667, 0.2667).
LossWeights default_start_weights() noexcept;
LossWeights default_end_weights() noexcept;

/// Linear warm-up from 0 to base_lr over `warmup_steps`, then half-cosine decay to 0 at `total_steps`.
double lr_schedule(long step, long total_steps, long warmup_steps, double base_lr);

/// Foreground probability of the two-way softmax over (logit of '0', logit of '1').
double two_way_softmax(double logit0, double logit1) noexcept;

/// Frame-segmentation objective on answer-position logits.
///
/// `logits` holds batch * (frames + 1) rows of `vocab` logits: for every
/// sample, one row per mask token followed by one row for the end token.
/// The language-model loss uses all rows with `targets`; the segmentation
/// losses use the two-way softmax of the first `frames` rows of each sample.
/// Returns every component, their weighted total, and d total / d logits.
struct ObjectiveResult {
    LossBreakdown parts;
    std::vector<double> dlogits;
    SegBatch seg;
};

ObjectiveResult joint_objective(std::span<const double> logits, std::size_t vocab, std::size_t batch,
                                std::size_t frames, std::span<const int> targets, std::span<const double> labels,
                                int id0, int id1, const LossWeights& w, const LossParams& params);

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    bool finite = true;
};

/// Compares the analytic gradient returned by `loss_fn` against central
/// finite differences with step `perturbation`. Relative error per element is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
GradCheckResult grad_check(const std::function<LossValue(std::span<const double>)>& loss_fn,
                           std::span<const double> point, double perturbation);

}  // namespace frameseg
