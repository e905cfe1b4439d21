#include "frameseg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <spdlog/spdlog.h>

#include "frameseg/error.hpp"

namespace frameseg {

void SegBatch::validate() const {
    if (probs.size() != size() || labels.size() != size()) {
        throw InvalidInput("SegBatch: expected " + std::to_string(size()) + " probabilities and labels, got " +
                           std::to_string(probs.size()) + " and " + std::to_string(labels.size()));
    }
    for (std::size_t i = 0; i < size(); ++i) {
        if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
            throw InvalidInput("SegBatch: probability out of [0,1] at element " + std::to_string(i));
        }
        if (labels[i] != 0.0 && labels[i] != 1.0) {
            throw InvalidInput("SegBatch: non-binary label at element " + std::to_string(i));
        }
    }
}

void LossParams::validate() const {
    if (!(pos_weight > 0.0)) {
        throw InvalidInput("pos_weight must be positive");
    }
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
        throw InvalidInput("Tversky alpha and beta must lie in (0,1)");
    }
    if (!(epsilon > 0.0)) {
        throw InvalidInput("epsilon must be positive");
    }
    if (std::abs(alpha + beta - 1.0) > 1e-12) {
        spdlog::info("Tversky alpha + beta = {} (override of alpha = 1 - beta)", alpha + beta);
    }
}

LossValue bce_loss(const SegBatch& batch, double pos_weight, double epsilon) {
    batch.validate();
    const std::size_t n = batch.size();
    if (n == 0) {
        throw InvalidInput("bce_loss: empty batch");
    }
    LossValue out;
    out.grad.assign(n, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p_raw = batch.probs[i];
        const double p = std::clamp(p_raw, epsilon, 1.0 - epsilon);
        const double y = batch.labels[i];
        sum += -(pos_weight * y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
        // Clamped elements carry no gradient.
        if (p_raw > epsilon && p_raw < 1.0 - epsilon) {
            out.grad[i] = -(pos_weight * y / p - (1.0 - y) / (1.0 - p)) * inv_n;
        }
    }
    out.value = sum * inv_n;
    return out;
}

LossValue tversky_loss(const SegBatch& batch, double alpha, double beta, double epsilon) {
    batch.validate();
    const std::size_t n = batch.size();
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = batch.probs[i];
        const double y = batch.labels[i];
        tp += p * y;
        fp += p * (1.0 - y);
        fn += (1.0 - p) * y;
    }
    const double num = tp + epsilon;
    const double den = tp + alpha * fp + beta * fn + epsilon;
    LossValue out;
    out.value = 1.0 - num / den;
    out.grad.resize(n);
    const double inv_den2 = 1.0 / (den * den);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = batch.labels[i];
        const double dnum = y;
        const double dden = y + alpha * (1.0 - y) - beta * y;
        out.grad[i] = -(dnum * den - num * dden) * inv_den2;
    }
    return out;
}

LossValue generalized_dice_loss(const SegBatch& batch, double epsilon) {
    batch.validate();
    const std::size_t n = batch.size();
    double vol_fg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        vol_fg += batch.labels[i];
    }
    const double vol_bg = static_cast<double>(n) - vol_fg;
    const double w_fg = 1.0 / ((vol_fg + epsilon) * (vol_fg + epsilon));
    const double w_bg = 1.0 / ((vol_bg + epsilon) * (vol_bg + epsilon));

    double inter_fg = 0.0;
    double inter_bg = 0.0;
    double union_fg = 0.0;
    double union_bg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = batch.probs[i];
        const double y = batch.labels[i];
        inter_fg += p * y;
        inter_bg += (1.0 - p) * (1.0 - y);
        union_fg += p + y;
        union_bg += (1.0 - p) + (1.0 - y);
    }
    const double inter = w_fg * inter_fg + w_bg * inter_bg;
    const double uni = w_fg * union_fg + w_bg * union_bg;

    LossValue out;
    out.value = 1.0 - 2.0 * inter / uni;
    out.grad.resize(n);
    const double duni = w_fg - w_bg;
    const double inv_uni2 = 1.0 / (uni * uni);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = batch.labels[i];
        const double dinter = w_fg * y - w_bg * (1.0 - y);
        out.grad[i] = -2.0 * (dinter * uni - inter * duni) * inv_uni2;
    }
    return out;
}

LossValue lm_loss(std::span<const double> logits, std::size_t vocab, std::span<const int> targets) {
    const std::size_t positions = targets.size();
    if (positions == 0) {
        throw InvalidInput("lm_loss: no supervised positions");
    }
    if (vocab == 0 || logits.size() != positions * vocab) {
        throw InvalidInput("lm_loss: logits size " + std::to_string(logits.size()) + " does not match " +
                           std::to_string(positions) + " x " + std::to_string(vocab));
    }
    LossValue out;
    out.grad.resize(logits.size());
    const double inv_n = 1.0 / static_cast<double>(positions);
    double sum = 0.0;
    for (std::size_t r = 0; r < positions; ++r) {
        const int t = targets[r];
        if (t < 0 || static_cast<std::size_t>(t) >= vocab) {
            throw InvalidInput("lm_loss: target id " + std::to_string(t) + " outside vocabulary");
        }
        const auto row = logits.subspan(r * vocab, vocab);
        const double mx = *std::max_element(row.begin(), row.end());
        double z = 0.0;
        for (const double v : row) {
            z += std::exp(v - mx);
        }
        const double lse = mx + std::log(z);
        sum += lse - row[static_cast<std::size_t>(t)];
        for (std::size_t c = 0; c < vocab; ++c) {
            out.grad[r * vocab + c] = std::exp(row[c] - lse) * inv_n;
        }
        out.grad[r * vocab + static_cast<std::size_t>(t)] -= inv_n;
    }
    out.value = sum * inv_n;
    return out;
}

double combined_loss(double lm, double bce, double tv, double gd, const LossWeights& w) noexcept {
    return w.lm * lm + w.bce * bce + w.tv * tv + w.gd * gd;
}

LossWeights weight_schedule(int epoch, int warmup_epochs, const LossWeights& start, const LossWeights& end) {
    if (epoch < 1) {
        throw InvalidInput("weight_schedule: epochs are 1-based, got " + std::to_string(epoch));
    }
    if (warmup_epochs < 1) {
        throw InvalidInput("weight_schedule: warmup_epochs must be >= 1");
    }
    if (epoch > warmup_epochs) {
        return end;
    }
    const double t = static_cast<double>(epoch - 1) / warmup_epochs;
    auto lerp = [t](double a, double b) { return a + t * (b - a); };
    return {lerp(start.lm, end.lm), lerp(start.bce, end.bce), lerp(start.tv, end.tv), lerp(start.gd, end.gd)};
}

LossWeights default_start_weights() noexcept { return {1.0, 0.0, 0.0, 0.0}; }

LossWeights default_end_weights() noexcept { return {0.2, 0.2667, 0.2667, 0.2667}; }

double lr_schedule(long step, long total_steps, long warmup_steps, double base_lr) {
    if (step < 0 || step > total_steps) {
        throw InvalidInput("lr_schedule: step " + std::to_string(step) + " outside [0, " +
                           std::to_string(total_steps) + "]");
    }
    if (warmup_steps > 0 && step < warmup_steps) {
        return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
    }
    if (total_steps <= warmup_steps) {
        return base_lr;
    }
    const double progress =
        static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
    return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

double two_way_softmax(double logit0, double logit1) noexcept {
    const double d = logit1 - logit0;
    if (d >= 0.0) {
        return 1.0 / (1.0 + std::exp(-d));
    }
    const double e = std::exp(d);
    return e / (1.0 + e);
}

ObjectiveResult joint_objective(std::span<const double> logits, std::size_t vocab, std::size_t batch,
                                std::size_t frames, std::span<const int> targets, std::span<const double> labels,
                                int id0, int id1, const LossWeights& w, const LossParams& params) {
    const std::size_t rows_per_sample = frames + 1;
    const std::size_t rows = batch * rows_per_sample;
    if (logits.size() != rows * vocab || targets.size() != rows || labels.size() != batch * frames) {
        throw InvalidInput("joint_objective: inconsistent logits/targets/labels shapes");
    }
    if (id0 == id1 || id0 < 0 || id1 < 0 || static_cast<std::size_t>(std::max(id0, id1)) >= vocab) {
        throw InvalidInput("joint_objective: invalid '0'/'1' token ids");
    }
    const auto i0 = static_cast<std::size_t>(id0);
    const auto i1 = static_cast<std::size_t>(id1);

    ObjectiveResult out;
    const LossValue lm = lm_loss(logits, vocab, targets);

    out.seg.batch = batch;
    out.seg.frames = frames;
    out.seg.labels.assign(labels.begin(), labels.end());
    out.seg.probs.resize(batch * frames);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t k = 0; k < frames; ++k) {
            const std::size_t row = (b * rows_per_sample + k) * vocab;
            out.seg.probs[b * frames + k] = two_way_softmax(logits[row + i0], logits[row + i1]);
        }
    }
    const LossValue bce = bce_loss(out.seg, params.pos_weight, params.epsilon);
    const LossValue tv = tversky_loss(out.seg, params.alpha, params.beta, params.epsilon);
    const LossValue gd = generalized_dice_loss(out.seg, params.epsilon);

    out.parts = {lm.value, bce.value, tv.value, gd.value, 0.0};
    out.parts.total = combined_loss(lm.value, bce.value, tv.value, gd.value, w);

    out.dlogits.resize(lm.grad.size());
    for (std::size_t i = 0; i < lm.grad.size(); ++i) {
        out.dlogits[i] = w.lm * lm.grad[i];
    }
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t k = 0; k < frames; ++k) {
            const std::size_t e = b * frames + k;
            const double p = out.seg.probs[e];
            const double dp = w.bce * bce.grad[e] + w.tv * tv.grad[e] + w.gd * gd.grad[e];
            // p = sigmoid(z1 - z0)
            const double dz = dp * p * (1.0 - p);
            const std::size_t row = (b * rows_per_sample + k) * vocab;
            out.dlogits[row + i1] += dz;
            out.dlogits[row + i0] -= dz;
        }
    }
    return out;
}

GradCheckResult grad_check(const std::function<LossValue(std::span<const double>)>& loss_fn,
                           std::span<const double> point, double perturbation) {
    GradCheckResult result;
    const LossValue analytic = loss_fn(point);
    if (!std::isfinite(analytic.value) || analytic.grad.size() != point.size()) {
        result.finite = false;
        return result;
    }
    std::vector<double> x(point.begin(), point.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + perturbation;
        const double up = loss_fn(x).value;
        x[i] = orig - perturbation;
        const double down = loss_fn(x).value;
        x[i] = orig;
        const double numeric = (up - down) / (2.0 * perturbation);
        const double a = analytic.grad[i];
        if (!std::isfinite(up) || !std::isfinite(down) || !std::isfinite(a)) {
            result.finite = false;
            result.worst_index = i;
            return result;
        }
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
        const double rel = std::abs(a - numeric) / denom;
        if (rel > result.max_rel_error) {
            result.max_rel_error = rel;
            result.worst_index = i;
        }
    }
    return result;
}

}  // namespace frameseg
