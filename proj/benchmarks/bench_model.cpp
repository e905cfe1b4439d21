#include <benchmark/benchmark.h>

#include <random>

#include "frameseg/model.hpp"

using namespace frameseg;

namespace {

struct Fixture {
    ToyDecoder model;
    InterleavedInput prompt;
};

Fixture make(int d_model, int frames) {
    const std::string query = "a person slices vegetables in a kitchen";
    VideoSample s{1, query, 150.0, std::nullopt, {}, {}, {}};
    ToyModelConfig cfg;
    cfg.d_model = d_model;
    cfg.frames = frames;
    cfg.frame_feature_dim = 16;
    cfg.vocab = Vocab::build(vocabulary_texts({s}, frames, false));
    Features f{static_cast<std::size_t>(frames), 16, std::vector<double>(static_cast<std::size_t>(frames) * 16)};
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& x : f.values) {
        x = n(rng);
    }
    InterleavedInput prompt = make_prompt_input(cfg.vocab, query, f, frames, false);
    cfg.max_seq_len = static_cast<int>(prompt.length()) + frames + 2;
    ToyDecoder m(cfg);
    m.init(5);
    return {std::move(m), std::move(prompt)};
}

void BM_ForwardBackward(benchmark::State& state) {
    const auto fx = make(static_cast<int>(state.range(0)), 25);
    const auto rows = fx.prompt.answer_positions();
    std::vector<std::size_t> valid(rows.begin(), rows.begin() + 1);
    Weights grads = fx.model.weights().zeros_like();
    for (auto _ : state) {
        Tape tape;
        const Matrix logits = fx.model.forward(fx.prompt, valid, &tape);
        fx.model.backward(tape, logits, grads);
        benchmark::DoNotOptimize(grads.head_w.data());
    }
    state.SetLabel(std::to_string(fx.prompt.length()) + " positions");
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BeamDecode(benchmark::State& state) {
    const auto fx = make(64, 25);
    for (auto _ : state) {
        benchmark::DoNotOptimize(beam_decode(fx.model, fx.prompt, static_cast<int>(state.range(0)), true));
    }
}
BENCHMARK(BM_BeamDecode)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
