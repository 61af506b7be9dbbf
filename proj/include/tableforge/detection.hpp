#pragma once

#include <algorithm>
#include <cstddef>
#include <tuple>
#include <vector>

#include "tableforge/geometry.hpp"

namespace tableforge {

struct Detection {
    CellBox box;
    double score = 0.0;
    CellKlass klass = CellKlass::content;
};

namespace detail {

struct RankedHit {
    double score;
    std::size_t image;
    std::size_t index;
    bool tp;
};

/// Greedy per-image matching in score order: a detection claims its
/// highest-IoU unmatched ground truth at or above the threshold; each
/// ground truth is matched at most once.
inline void match_image(const std::vector<Detection>& dets,
                        const std::vector<CellBox>& gts, double iou_thresh,
                        std::size_t image, std::vector<RankedHit>& out) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dets.size(); ++i)
        if (dets[i].klass == CellKlass::content) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&dets](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });
    std::vector<char> taken(gts.size(), 0);
    for (std::size_t i : order) {
        double best = 0.0;
        std::ptrdiff_t best_gt = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g]) continue;
            const double v = iou(dets[i].box, gts[g]);
            if (v >= iou_thresh && v > best) {
                best = v;
                best_gt = static_cast<std::ptrdiff_t>(g);
            }
        }
        const bool tp = best_gt >= 0;
        if (tp) taken[static_cast<std::size_t>(best_gt)] = 1;
        out.push_back({dets[i].score, image, i, tp});
    }
}

} // namespace detail

/// PASCAL VOC average precision for the single class `content` at a fixed
/// IoU threshold, all-point interpolation. Returns 0 when there are no
/// ground truths or no detections.
inline double voc_map(const std::vector<std::vector<Detection>>& detections,
                      const std::vector<std::vector<CellBox>>& ground_truths,
                      double iou_thresh = 0.5) {
    std::size_t n_gt = 0;
    for (const auto& g : ground_truths) n_gt += g.size();

    std::vector<detail::RankedHit> hits;
    const std::size_t n_images = std::min(detections.size(), ground_truths.size());
    for (std::size_t img = 0; img < detections.size(); ++img) {
        static const std::vector<CellBox> kNone;
        const auto& gts = img < n_images ? ground_truths[img] : kNone;
        detail::match_image(detections[img], gts, iou_thresh, img, hits);
    }
    if (hits.empty() || n_gt == 0) return 0.0;

    std::sort(hits.begin(), hits.end(), [](const detail::RankedHit& a, const detail::RankedHit& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.image != b.image) return a.image < b.image;
        return a.index < b.index;
    });

    // one precision/recall point per distinct score: detections tied on the
    // score enter the curve together, like sweeping a score threshold
    std::vector<double> precision, recall;
    std::size_t tp = 0, seen = 0;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (hits[i].tp) ++tp;
        ++seen;
        if (i + 1 < hits.size() && hits[i + 1].score == hits[i].score) continue;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(seen));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    }
    // precision envelope: best precision at this recall or beyond
    for (std::size_t i = precision.size(); i-- > 1;)
        precision[i - 1] = std::max(precision[i - 1], precision[i]);

    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < precision.size(); ++i) {
        if (recall[i] > prev_recall) {
            ap += (recall[i] - prev_recall) * precision[i];
            prev_recall = recall[i];
        }
    }
    return ap;
}

} // namespace tableforge
