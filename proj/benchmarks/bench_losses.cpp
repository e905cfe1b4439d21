#include <benchmark/benchmark.h>

#include <random>

#include "frameseg/losses.hpp"

using namespace frameseg;

namespace {

SegBatch batch_of(std::size_t batch, std::size_t frames) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    SegBatch b{batch, frames, {}, {}};
    for (std::size_t i = 0; i < batch * frames; ++i) {
        b.probs.push_back(u(rng));
        b.labels.push_back(static_cast<double>(rng() % 2));
    }
    return b;
}

void BM_Bce(benchmark::State& state) {
    const auto b = batch_of(16, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bce_loss(b, kDefaultPosWeight));
    }
}
BENCHMARK(BM_Bce)->Arg(25)->Arg(100);

void BM_Tversky(benchmark::State& state) {
    const auto b = batch_of(16, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(tversky_loss(b, 0.3, 0.7));
    }
}
BENCHMARK(BM_Tversky)->Arg(25)->Arg(100);

void BM_GeneralizedDice(benchmark::State& state) {
    const auto b = batch_of(16, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(generalized_dice_loss(b));
    }
}
BENCHMARK(BM_GeneralizedDice)->Arg(25)->Arg(100);

void BM_JointObjective(benchmark::State& state) {
    const std::size_t batch = 16;
    const std::size_t frames = 25;
    const auto vocab = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> logits(batch * (frames + 1) * vocab);
    for (auto& z : logits) {
        z = n(rng);
    }
    std::vector<int> targets;
    std::vector<double> labels;
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t k = 0; k < frames; ++k) {
            const int bit = static_cast<int>(rng() % 2);
            labels.push_back(bit);
            targets.push_back(3 + bit);
        }
        targets.push_back(1);
    }
    const auto w = default_end_weights();
    for (auto _ : state) {
        benchmark::DoNotOptimize(joint_objective(logits, vocab, batch, frames, targets, labels, 3, 4, w, LossParams{}));
    }
}
BENCHMARK(BM_JointObjective)->Arg(64)->Arg(1024);

}  // namespace
