#include "frameseg/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "frameseg/error.hpp"

namespace frameseg {

namespace {

void check_pairing(std::span<const PredictionRecord> records, std::span<const GroundTruth> gt) {
    if (records.size() != gt.size()) {
        throw InvalidInput("metrics: " + std::to_string(records.size()) + " prediction records for " +
                           std::to_string(gt.size()) + " ground-truth queries");
    }
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (records[i].qid != gt[i].qid) {
            throw InvalidInput("metrics: qid mismatch at position " + std::to_string(i) + " (" +
                               std::to_string(records[i].qid) + " vs " + std::to_string(gt[i].qid) + ")");
        }
    }
}

// All-point interpolated area under the precision/recall curve.
double interpolated_area(std::vector<double> precision, const std::vector<double>& recall) {
    for (std::size_t i = precision.size(); i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }
    double area = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < precision.size(); ++i) {
        area += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return area;
}

std::vector<std::uint8_t> highlight_positives(const std::vector<std::vector<int>>& saliency, std::size_t annotator) {
    std::vector<std::uint8_t> out(saliency.size());
    for (std::size_t c = 0; c < saliency.size(); ++c) {
        out[c] = saliency[c][annotator] >= kHighlightRating ? 1 : 0;
    }
    return out;
}

std::size_t top_clip(std::span<const double> scores) {
    // First maximum, so ties resolve to the lowest clip index.
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

double query_hl_ap(const PredictionRecord& rec, const GroundTruth& g, bool& has_positive) {
    has_positive = false;
    if (g.clip_saliency.empty()) {
        return 0.0;
    }
    if (rec.pred_clip_scores.size() != g.clip_saliency.size()) {
        throw InvalidInput("hl_metrics: qid " + std::to_string(g.qid) + " has " +
                           std::to_string(rec.pred_clip_scores.size()) + " clip scores for " +
                           std::to_string(g.clip_saliency.size()) + " clips");
    }
    const std::size_t annotators = g.clip_saliency.front().size();
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t a = 0; a < annotators; ++a) {
        const auto pos = highlight_positives(g.clip_saliency, a);
        if (std::none_of(pos.begin(), pos.end(), [](std::uint8_t v) { return v != 0; })) {
            continue;
        }
        sum += ranked_average_precision(rec.pred_clip_scores, pos);
        ++n;
    }
    has_positive = n > 0;
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

bool query_hit_at_1(const PredictionRecord& rec, const GroundTruth& g) {
    if (g.clip_saliency.empty() || rec.pred_clip_scores.empty()) {
        return false;
    }
    const auto& row = g.clip_saliency[top_clip(rec.pred_clip_scores)];
    return std::any_of(row.begin(), row.end(), [](int r) { return r >= kHighlightRating; });
}

}  // namespace

double iou_1d(const MomentSpan& a, const MomentSpan& b) noexcept {
    const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
    const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
    if (inter <= 0.0 || uni <= 0.0) {
        return 0.0;
    }
    return inter / (a.length() + b.length() - inter);
}

std::vector<MomentSpan> rank_predictions(std::span<const MomentSpan> spans) {
    std::vector<MomentSpan> out(spans.begin(), spans.end());
    std::stable_sort(out.begin(), out.end(), [](const MomentSpan& a, const MomentSpan& b) {
        const double ca = a.confidence.value_or(0.0);
        const double cb = b.confidence.value_or(0.0);
        if (ca != cb) {
            return ca > cb;
        }
        return a.start < b.start;
    });
    return out;
}

double recall_at_1(std::span<const PredictionRecord> records, std::span<const GroundTruth> gt, double threshold) {
    check_pairing(records, gt);
    if (gt.empty()) {
        throw InvalidInput("recall_at_1: no queries");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (records[i].pred_spans.empty()) {
            continue;
        }
        const MomentSpan top = rank_predictions(records[i].pred_spans).front();
        const bool hit = std::any_of(gt[i].spans.begin(), gt[i].spans.end(),
                                     [&](const MomentSpan& g) { return iou_1d(top, g) >= threshold; });
        hits += hit ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(gt.size());
}

double average_precision_detection(std::span<const MomentSpan> preds, std::span<const MomentSpan> gt,
                                   double threshold) {
    if (gt.empty()) {
        return 0.0;
    }
    if (preds.empty()) {
        return 0.0;
    }
    const auto ranked = rank_predictions(preds);
    std::vector<bool> used(gt.size(), false);
    std::vector<double> precision;
    std::vector<double> recall;
    precision.reserve(ranked.size());
    recall.reserve(ranked.size());
    std::size_t tp = 0;
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        // Candidate ground truths by decreasing IoU; take the best unmatched one above threshold.
        std::vector<std::size_t> order(gt.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<double> ious(gt.size());
        for (std::size_t g = 0; g < gt.size(); ++g) {
            ious[g] = iou_1d(ranked[r], gt[g]);
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ious[a] > ious[b]; });
        for (const auto g : order) {
            if (ious[g] < threshold) {
                break;
            }
            if (!used[g]) {
                used[g] = true;
                ++tp;
                break;
            }
        }
        precision.push_back(static_cast<double>(tp) / static_cast<double>(r + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(gt.size()));
    }
    return interpolated_area(std::move(precision), recall);
}

double map_at_iou(std::span<const PredictionRecord> records, std::span<const GroundTruth> gt, double threshold) {
    check_pairing(records, gt);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt[i].spans.empty()) {
            continue;
        }
        sum += average_precision_detection(records[i].pred_spans, gt[i].spans, threshold);
        ++n;
    }
    if (n == 0) {
        throw InvalidInput("map_at_iou: no query has ground-truth spans");
    }
    return sum / static_cast<double>(n);
}

std::vector<double> avg_map_thresholds() {
    std::vector<double> t;
    for (int k = 0; k < 10; ++k) {
        t.push_back((50 + 5 * k) / 100.0);
    }
    return t;
}

double avg_map(std::span<const PredictionRecord> records, std::span<const GroundTruth> gt) {
    double sum = 0.0;
    const auto thresholds = avg_map_thresholds();
    for (const double t : thresholds) {
        sum += map_at_iou(records, gt, t);
    }
    return sum / static_cast<double>(thresholds.size());
}

double ranked_average_precision(std::span<const double> scores, std::span<const std::uint8_t> positives) {
    if (scores.size() != positives.size()) {
        throw InvalidInput("ranked_average_precision: score/label length mismatch");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto n_pos = static_cast<std::size_t>(std::count_if(positives.begin(), positives.end(),
                                                               [](std::uint8_t v) { return v != 0; }));
    if (n_pos == 0) {
        return 0.0;
    }
    std::vector<double> precision(order.size());
    std::vector<double> recall(order.size());
    std::size_t tp = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        tp += positives[order[r]] != 0 ? 1 : 0;
        precision[r] = static_cast<double>(tp) / static_cast<double>(r + 1);
        recall[r] = static_cast<double>(tp) / static_cast<double>(n_pos);
    }
    return interpolated_area(std::move(precision), recall);
}

HighlightScores hl_metrics(std::span<const PredictionRecord> records, std::span<const GroundTruth> gt) {
    check_pairing(records, gt);
    HighlightScores out;
    double ap_sum = 0.0;
    std::size_t hits = 0;
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        bool has_positive = false;
        const double ap = query_hl_ap(records[i], gt[i], has_positive);
        if (!has_positive) {
            ++excluded;
            continue;
        }
        ap_sum += ap;
        hits += query_hit_at_1(records[i], gt[i]) ? 1 : 0;
        ++out.scored_queries;
    }
    if (excluded > 0) {
        spdlog::warn("hl_metrics: {} quer{} without highlight clips excluded", excluded, excluded == 1 ? "y" : "ies");
    }
    if (out.scored_queries > 0) {
        out.hl_map = ap_sum / static_cast<double>(out.scored_queries);
        out.hit_at_1 = static_cast<double>(hits) / static_cast<double>(out.scored_queries);
    }
    return out;
}

MetricsReport evaluate(std::span<const PredictionRecord> records, std::span<const GroundTruth> gt) {
    check_pairing(records, gt);
    MetricsReport rep;
    rep.metrics["R1@0.5"] = recall_at_1(records, gt, 0.5);
    rep.metrics["R1@0.7"] = recall_at_1(records, gt, 0.7);
    rep.metrics["mAP@0.5"] = map_at_iou(records, gt, 0.5);
    rep.metrics["mAP@0.75"] = map_at_iou(records, gt, 0.75);
    rep.metrics["mAP_avg"] = avg_map(records, gt);
    const auto hl = hl_metrics(records, gt);
    rep.metrics["HL_mAP"] = hl.hl_map;
    rep.metrics["HL_HIT@1"] = hl.hit_at_1;

    const auto thresholds = avg_map_thresholds();
    for (std::size_t i = 0; i < gt.size(); ++i) {
        QueryBreakdown q;
        q.qid = gt[i].qid;
        if (!records[i].pred_spans.empty()) {
            const auto top = rank_predictions(records[i].pred_spans).front();
            for (const auto& g : gt[i].spans) {
                q.top1_iou = std::max(q.top1_iou, iou_1d(top, g));
            }
        }
        q.ap_at_05 = average_precision_detection(records[i].pred_spans, gt[i].spans, 0.5);
        q.ap_at_075 = average_precision_detection(records[i].pred_spans, gt[i].spans, 0.75);
        for (const double t : thresholds) {
            q.ap_avg += average_precision_detection(records[i].pred_spans, gt[i].spans, t);
        }
        q.ap_avg /= static_cast<double>(thresholds.size());
        bool has_positive = false;
        q.hl_ap = query_hl_ap(records[i], gt[i], has_positive);
        q.hit_at_1 = has_positive && query_hit_at_1(records[i], gt[i]);
        rep.per_query.push_back(q);
    }
    return rep;
}

std::vector<PredictionRecord> align_by_qid(std::span<const PredictionRecord> records,
                                           std::span<const GroundTruth> gt) {
    std::unordered_map<std::int64_t, const PredictionRecord*> by_qid;
    for (const auto& r : records) {
        if (!by_qid.emplace(r.qid, &r).second) {
            throw InvalidInput("duplicate prediction for qid " + std::to_string(r.qid));
        }
    }
    std::vector<PredictionRecord> out;
    std::vector<std::int64_t> missing;
    std::set<std::int64_t> gt_qids;
    for (const auto& g : gt) {
        gt_qids.insert(g.qid);
        auto it = by_qid.find(g.qid);
        if (it == by_qid.end()) {
            missing.push_back(g.qid);
            continue;
        }
        out.push_back(*it->second);
    }
    std::vector<std::int64_t> unexpected;
    for (const auto& r : records) {
        if (!gt_qids.contains(r.qid)) {
            unexpected.push_back(r.qid);
        }
    }
    if (!missing.empty() || !unexpected.empty()) {
        auto list = [](const std::vector<std::int64_t>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size() && i < 10; ++i) {
                s += (i ? "," : "") + std::to_string(v[i]);
            }
            if (v.size() > 10) {
                s += ",...";
            }
            return s;
        };
        throw InvalidInput("qid sets differ: " + std::to_string(missing.size()) + " ground-truth qid(s) without prediction [" +
                           list(missing) + "], " + std::to_string(unexpected.size()) +
                           " prediction qid(s) without ground truth [" + list(unexpected) + "]");
    }
    return out;
}

}  // namespace frameseg
