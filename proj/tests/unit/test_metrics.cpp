#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "frameseg/error.hpp"
#include "frameseg/metrics.hpp"
#include "metric_oracles.hpp"

using namespace frameseg;

using namespace oracle;

TEST_CASE("iou") {
    CHECK(iou_1d(sp(0, 10), sp(0, 10)) == 1.0);
    CHECK(iou_1d(sp(0, 10), sp(10, 20)) == 0.0);
    CHECK(iou_1d(sp(0, 10), sp(5, 15)) == doctest::Approx(5.0 / 15.0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 100);
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        const MomentSpan x = sp(std::min(a, b), std::max(a, b) + 0.1);
        const MomentSpan y = sp(std::min(c, d), std::max(c, d) + 0.1);
        CHECK(iou_1d(x, y) == iou_1d(y, x));
        CHECK(iou_1d(x, y) >= 0.0);
        CHECK(iou_1d(x, y) <= 1.0);
    }
}

TEST_CASE("recall at 1") {
    const std::vector<GroundTruth> gt{{1, {sp(0, 10)}, {}}};
    std::vector<PredictionRecord> rec{{1, {sp(0, 10, 0.9), sp(50, 60, 0.2)}, {}}};
    CHECK(recall_at_1(rec, gt, 1.0) == 1.0);
    rec[0].pred_spans = {sp(0, 6, 0.9)};  // IoU 0.6
    CHECK(recall_at_1(rec, gt, 0.5) == 1.0);
    CHECK(recall_at_1(rec, gt, 0.7) == 0.0);
    rec[0].pred_spans.clear();
    CHECK(recall_at_1(rec, gt, 0.5) == 0.0);
    CHECK_THROWS_AS(recall_at_1(std::vector<PredictionRecord>{}, std::vector<GroundTruth>{}, 0.5), InvalidInput);
    const std::vector<PredictionRecord> wrong{{2, {}, {}}};
    CHECK_THROWS_AS(recall_at_1(wrong, gt, 0.5), InvalidInput);
}

TEST_CASE("recall at 1 is monotone in the threshold") {
    std::mt19937_64 rng(2);
    std::vector<PredictionRecord> recs;
    std::vector<GroundTruth> gts;
    for (int q = 0; q < 50; ++q) {
        gts.push_back({q, disjoint_spans(rng, 2, 100), {}});
        auto p = disjoint_spans(rng, 3, 100);
        for (auto& s : p) {
            s.confidence = std::uniform_real_distribution<double>(0, 1)(rng);
        }
        recs.push_back({q, rank_predictions(p), {}});
    }
    double prev = 1.0;
    for (const double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double r = recall_at_1(recs, gts, t);
        CHECK(r <= prev);
        prev = r;
    }
}

TEST_CASE("detection AP hand values") {
    const std::vector<MomentSpan> gt{sp(0, 10)};
    CHECK(average_precision_detection(std::vector<MomentSpan>{sp(0, 10, 1)}, gt, 0.5) == 1.0);
    CHECK(average_precision_detection(std::vector<MomentSpan>{sp(50, 60, 0.9), sp(0, 10, 0.8)}, gt, 0.5) ==
          doctest::Approx(0.5));
    CHECK(average_precision_detection(std::vector<MomentSpan>{}, gt, 0.5) == 0.0);
    // A second prediction on an already matched target is a false positive.
    CHECK(average_precision_detection(std::vector<MomentSpan>{sp(0, 10, 0.9), sp(0, 9, 0.8)},
                                      std::vector<MomentSpan>{sp(0, 10), sp(40, 50)}, 0.5) ==
          doctest::Approx(0.5));
}

TEST_CASE("greedy AP equals the optimal assignment AP") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const int n_gt = 1 + static_cast<int>(rng() % 4);
        const int n_pred = 1 + static_cast<int>(rng() % 8);
        const auto gt = disjoint_spans(rng, n_gt, 60);
        std::vector<MomentSpan> preds;
        for (int p = 0; p < n_pred; ++p) {
            const auto& g = gt[rng() % gt.size()];
            const double len = g.length();
            const double s = std::max(0.0, g.start + (u(rng) - 0.5) * len);
            preds.push_back(sp(s, s + len * (0.5 + u(rng)), u(rng)));
        }
        for (const double thr : avg_map_thresholds()) {
            const double greedy = average_precision_detection(rank_predictions(preds), gt, thr);
            REQUIRE(std::abs(greedy - optimal_ap(preds, gt, thr)) <= 1e-9);
        }
    }
}

TEST_CASE("AP bounds, monotonicity and rank invariance") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto gt = disjoint_spans(rng, 1 + static_cast<int>(rng() % 3), 50);
        std::vector<MomentSpan> preds = disjoint_spans(rng, 1 + static_cast<int>(rng() % 5), 50);
        for (auto& p : preds) {
            p.confidence = u(rng);
        }
        const double ap = average_precision_detection(rank_predictions(preds), gt, 0.5);
        CHECK(ap >= 0.0);
        CHECK(ap <= 1.0);

        auto better = preds;
        better.push_back(sp(gt[0].start, gt[0].end, 2.0));
        CHECK(average_precision_detection(rank_predictions(better), gt, 0.5) >= ap - 1e-12);

        auto rescaled = preds;
        for (auto& p : rescaled) {
            p.confidence = 3.0 * *p.confidence * *p.confidence + 1.0;
        }
        CHECK(average_precision_detection(rank_predictions(rescaled), gt, 0.5) == ap);
    }
}

TEST_CASE("mAP skips queries without ground truth") {
    const std::vector<GroundTruth> gt{{1, {sp(0, 10)}, {}}, {2, {}, {}}};
    const std::vector<PredictionRecord> rec{{1, {sp(0, 10, 1)}, {}}, {2, {sp(0, 10, 1)}, {}}};
    CHECK(map_at_iou(rec, gt, 0.5) == 1.0);
    CHECK(avg_map(rec, gt) == 1.0);
    const auto t = avg_map_thresholds();
    REQUIRE(t.size() == 10);
    CHECK(t.front() == doctest::Approx(0.5));
    CHECK(t.back() == doctest::Approx(0.95));
}

TEST_CASE("ranked AP hand values") {
    const std::vector<double> equal(4, 0.3);
    CHECK(ranked_average_precision(equal, std::vector<std::uint8_t>{0, 0, 0, 1}) == doctest::Approx(0.25));
    CHECK(ranked_average_precision(equal, std::vector<std::uint8_t>{0, 1, 0, 1}) == doctest::Approx(0.5));
    CHECK(ranked_average_precision(std::vector<double>{0.9, 0.1, 0.8, 0.2}, std::vector<std::uint8_t>{1, 0, 1, 0}) ==
          1.0);
    CHECK(ranked_average_precision(equal, std::vector<std::uint8_t>{0, 0, 0, 0}) == 0.0);
}

TEST_CASE("ranked AP matches the definition on random instances") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 30;
        std::vector<double> scores(n);
        std::vector<std::uint8_t> pos(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = static_cast<double>(rng() % 7) / 7.0;  // coarse values force ties
            pos[i] = static_cast<std::uint8_t>(rng() % 3 == 0);
        }
        REQUIRE(std::abs(ranked_average_precision(scores, pos) - ranked_ap_oracle(scores, pos)) <= 1e-9);
    }
}

TEST_CASE("highlight metrics") {
    const std::vector<std::vector<int>> sal{{4, 4, 2}, {1, 0, 4}, {0, 0, 0}, {2, 3, 1}};
    const std::vector<GroundTruth> gt{{5, {sp(0, 2)}, sal}};
    std::vector<PredictionRecord> rec{{5, {}, {1, 1, 0, 0}}};
    auto hl = hl_metrics(rec, gt);
    // The third annotator's only positive sits at rank two.
    CHECK(hl.hl_map == doctest::Approx(5.0 / 6.0));
    CHECK(hl.hit_at_1 == 1.0);

    rec[0].pred_clip_scores = {0.1, 0.2, 0.9, 0.3};
    hl = hl_metrics(rec, gt);
    CHECK(hl.hit_at_1 == 0.0);
    // Each annotator: positives by rank under scores (clip 2, 3, 1, 0).
    const double a0 = ranked_ap_oracle({0.1, 0.2, 0.9, 0.3}, {1, 0, 0, 0});
    const double a2 = ranked_ap_oracle({0.1, 0.2, 0.9, 0.3}, {0, 1, 0, 0});
    CHECK(hl.hl_map == doctest::Approx((a0 + a0 + a2) / 3.0));

    const std::vector<GroundTruth> none{{6, {sp(0, 2)}, {{1, 2}, {3, 3}}}};
    const std::vector<PredictionRecord> r6{{6, {}, {0.5, 0.5}}};
    const auto h6 = hl_metrics(r6, none);
    CHECK(h6.scored_queries == 0);

    const std::vector<PredictionRecord> short_rec{{5, {}, {0.1}}};
    CHECK_THROWS_AS(hl_metrics(short_rec, gt), InvalidInput);
}

TEST_CASE("evaluate reports every key for a perfect predictor") {
    std::vector<GroundTruth> gt;
    std::vector<PredictionRecord> rec;
    for (int q = 0; q < 5; ++q) {
        gt.push_back({q, {sp(2.0 * q, 2.0 * q + 6)}, {{0, 0}, {4, 4}, {1, 0}, {0, 1}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}});
        rec.push_back({q, {sp(2.0 * q, 2.0 * q + 6, 1.0)}, {0, 1, 0, 0, 0, 0, 0, 0}});
    }
    const auto report = evaluate(rec, gt);
    for (const char* k : {"R1@0.5", "R1@0.7", "mAP@0.5", "mAP@0.75", "mAP_avg", "HL_mAP", "HL_HIT@1"}) {
        REQUIRE(report.metrics.count(k) == 1);
        CHECK(report.metrics.at(k) == doctest::Approx(1.0));
    }
    CHECK(report.per_query.size() == 5);
}

TEST_CASE("alignment by qid") {
    const std::vector<GroundTruth> gt{{1, {}, {}}, {2, {}, {}}};
    const std::vector<PredictionRecord> rec{{2, {}, {}}, {1, {}, {}}};
    const auto aligned = align_by_qid(rec, gt);
    CHECK(aligned[0].qid == 1);
    CHECK(aligned[1].qid == 2);
    const std::vector<PredictionRecord> stray{{1, {}, {}}, {3, {}, {}}};
    try {
        (void)align_by_qid(stray, gt);
        FAIL("expected a mismatch");
    } catch (const InvalidInput& e) {
        const std::string what = e.what();
        CHECK(what.find('2') != std::string::npos);
        CHECK(what.find('3') != std::string::npos);
    }
}
