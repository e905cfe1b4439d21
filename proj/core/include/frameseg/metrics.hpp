#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "frameseg/maskcodec.hpp"

namespace frameseg {

/// Model output for one query.
struct PredictionRecord {
    std::int64_t qid = 0;
    std::vector<MomentSpan> pred_spans;  // confidence required
    std::vector<double> pred_clip_scores;
};

/// Reference annotation for one query.
struct GroundTruth {
    std::int64_t qid = 0;
    std::vector<MomentSpan> spans;
    std::vector<std::vector<int>> clip_saliency;  // clips x annotators
};

inline constexpr int kHighlightRating = 4;

double iou_1d(const MomentSpan& a, const MomentSpan& b) noexcept;

/// Predictions ordered by confidence (descending), ties broken by earlier start.
std::vector<MomentSpan> rank_predictions(std::span<const MomentSpan> spans);

/// Fraction of queries whose top-ranked span reaches `threshold` IoU with some
/// ground-truth span. Records and ground truth are paired by position and must
/// carry identical qids.
double recall_at_1(std::span<const PredictionRecord> records, std::span<const GroundTruth> gt, double threshold);

/// Detection AP for one query: greedy best-IoU matching in confidence order,
/// all-point interpolated precision/recall area.
double average_precision_detection(std::span<const MomentSpan> preds, std::span<const MomentSpan> gt,
                                   double threshold);

/// Mean detection AP over queries; queries without ground-truth spans are skipped.
double map_at_iou(std::span<const PredictionRecord> records, std::span<const GroundTruth> gt, double threshold);

/// IoU thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> avg_map_thresholds();
double avg_map(std::span<const PredictionRecord> records, std::span<const GroundTruth> gt);

/// Interpolated AP of a ranked retrieval: items sorted by score descending
/// (ties by lower index), precision made monotone from the tail, averaged
/// over the ranks of positive items. Returns 0 when there are no positives.
double ranked_average_precision(std::span<const double> scores, std::span<const std::uint8_t> positives);

struct HighlightScores {
    double hl_map = 0.0;
    double hit_at_1 = 0.0;
    std::size_t scored_queries = 0;
};

/// Highlight metrics with "Very Good" (rating 4) clips as positives.
/// hl_map averages, per query, the AP of each annotator that has at least one
/// positive, then averages over queries that have any positive.
HighlightScores hl_metrics(std::span<const PredictionRecord> records, std::span<const GroundTruth> gt);

struct QueryBreakdown {
    std::int64_t qid = 0;
    double top1_iou = 0.0;
    double ap_at_05 = 0.0;
    double ap_at_075 = 0.0;
    double ap_avg = 0.0;
    double hl_ap = 0.0;
    bool hit_at_1 = false;
};

/// Full report; metric values are fractions in [0,1].
struct MetricsReport {
    std::map<std::string, double> metrics;  // R1@0.5, R1@0.7, mAP@0.5, mAP@0.75, mAP_avg, HL_mAP, HL_HIT@1
    std::vector<QueryBreakdown> per_query;
};

MetricsReport evaluate(std::span<const PredictionRecord> records, std::span<const GroundTruth> gt);

/// Pairs predictions with ground truth by qid, in ground-truth order.
/// Throws InvalidInput listing missing or unexpected qids.
std::vector<PredictionRecord> align_by_qid(std::span<const PredictionRecord> records,
                                           std::span<const GroundTruth> gt);

}  // namespace frameseg
