#include <benchmark/benchmark.h>

#include <random>

#include "frameseg/maskcodec.hpp"
#include "frameseg/metrics.hpp"

using namespace frameseg;

namespace {

void BM_ParseAndConvert(benchmark::State& state) {
    const Timeline tl(150.0, 30.0, 25);
    const std::string text = "0000000000001111111111010";
    for (auto _ : state) {
        const auto mask = parse_mask(text, 25, ParseMode::strict);
        benchmark::DoNotOptimize(mask_to_moments(mask.bits, tl));
    }
}
BENCHMARK(BM_ParseAndConvert);

void BM_MomentsToMask(benchmark::State& state) {
    const Timeline tl(150.0, 30.0, static_cast<int>(state.range(0)));
    const std::vector<MomentSpan> spans{{10, 40, {}}, {72, 132, {}}, {138, 144, {}}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(moments_to_mask(spans, tl));
    }
}
BENCHMARK(BM_MomentsToMask)->Arg(25)->Arg(100);

void BM_Evaluate(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    const auto queries = static_cast<std::size_t>(state.range(0));
    std::vector<PredictionRecord> recs;
    std::vector<GroundTruth> gts;
    for (std::size_t q = 0; q < queries; ++q) {
        GroundTruth g{static_cast<std::int64_t>(q), {{20, 40, {}}, {90, 110, {}}}, {}};
        PredictionRecord r{g.qid, {}, {}};
        for (int k = 0; k < 75; ++k) {
            g.clip_saliency.push_back({static_cast<int>(rng() % 5), static_cast<int>(rng() % 5),
                                       static_cast<int>(rng() % 5)});
            r.pred_clip_scores.push_back(u(rng));
        }
        for (int k = 0; k < 4; ++k) {
            const double s = 140 * u(rng);
            r.pred_spans.push_back({s, s + 10 + 20 * u(rng), u(rng)});
        }
        r.pred_spans = rank_predictions(r.pred_spans);
        recs.push_back(std::move(r));
        gts.push_back(std::move(g));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(recs, gts));
    }
}
BENCHMARK(BM_Evaluate)->Arg(100)->Arg(1550);

}  // namespace
