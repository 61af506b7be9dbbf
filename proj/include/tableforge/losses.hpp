#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tableforge/geometry.hpp"

namespace tableforge {

/// Multi-task weighting: l = lambda * l_s + (1 - lambda) * l_box with
/// l_box = mean over cells of (lambda_iou * l_iou + lambda_l1 * l_1).
struct LossWeights {
    double lambda = 0.5;
    double lambda_iou = 1.0;
    double lambda_l1 = 1.0;
};

struct BoxGrad {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    std::array<double, 4> coords() const { return {x0, y0, x1, y1}; }
};

struct BoxLoss {
    double loss = 0.0;
    BoxGrad grad; // d loss / d pred
};

/// Epsilon used to un-degenerate predicted boxes (x0 >= x1 or y0 >= y1)
/// before loss evaluation.
inline constexpr double kDegenerateEps = 1e-6;

inline CellBox clamp_degenerate(CellBox box) {
    if (box.x1 <= box.x0) box.x1 = box.x0 + kDegenerateEps;
    if (box.y1 <= box.y0) box.y1 = box.y0 + kDegenerateEps;
    return box;
}

/// Sum of absolute coordinate differences; subgradient 0 at equality.
inline BoxLoss l1_loss(const CellBox& pred, const CellBox& gt) {
    BoxLoss out;
    const auto p = pred.coords();
    const auto g = gt.coords();
    double* grad[4] = {&out.grad.x0, &out.grad.y0, &out.grad.x1, &out.grad.y1};
    for (int i = 0; i < 4; ++i) {
        const double d = p[i] - g[i];
        out.loss += std::abs(d);
        *grad[i] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    }
    return out;
}

/// Generalized IoU: IoU - (C - U) / C with C the area of the smallest
/// enclosing box and U the union area. 1 for identical boxes, tends to -1
/// for far-apart boxes, scale invariant.
inline double giou(const CellBox& a, const CellBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    const CellBox enc = enclosing_box(a, b);
    const double c = enc.area();
    return inter / uni - (c - uni) / c;
}

namespace detail {

/// d giou / d pred, derived from giou = I/U + U/C - 1 with
/// U = A + B - I. Piecewise smooth; at argmin/argmax ties the one-sided
/// derivative is returned.
inline BoxGrad giou_gradient(const CellBox& p, const CellBox& b) {
    const double wI = std::min(p.x1, b.x1) - std::max(p.x0, b.x0);
    const double hI = std::min(p.y1, b.y1) - std::max(p.y0, b.y0);
    const bool overlap = wI > 0.0 && hI > 0.0;
    const double inter = overlap ? wI * hI : 0.0;

    const double area_p = p.area();
    const double uni = area_p + b.area() - inter;

    const double wC = std::max(p.x1, b.x1) - std::min(p.x0, b.x0);
    const double hC = std::max(p.y1, b.y1) - std::min(p.y0, b.y0);
    const double c = wC * hC;

    // partials of the prediction area
    const double dA[4] = {-(p.y1 - p.y0), -(p.x1 - p.x0), p.y1 - p.y0, p.x1 - p.x0};
    // partials of the intersection
    double dI[4] = {0, 0, 0, 0};
    if (overlap) {
        if (p.x0 > b.x0) dI[0] = -hI;
        if (p.y0 > b.y0) dI[1] = -wI;
        if (p.x1 < b.x1) dI[2] = hI;
        if (p.y1 < b.y1) dI[3] = wI;
    }
    // partials of the enclosing box
    double dC[4] = {0, 0, 0, 0};
    if (p.x0 < b.x0) dC[0] = -hC;
    if (p.y0 < b.y0) dC[1] = -wC;
    if (p.x1 > b.x1) dC[2] = hC;
    if (p.y1 > b.y1) dC[3] = wC;

    BoxGrad g;
    double* out[4] = {&g.x0, &g.y0, &g.x1, &g.y1};
    for (int i = 0; i < 4; ++i) {
        const double dU = dA[i] - dI[i];
        const double d_iou = (dI[i] * uni - inter * dU) / (uni * uni);
        const double d_uc = (dU * c - uni * dC[i]) / (c * c);
        *out[i] = d_iou + d_uc;
    }
    return g;
}

} // namespace detail

/// IoU loss 1 - GIoU(pred, gt) with its analytic gradient w.r.t. pred.
/// Degenerate predictions are widened by kDegenerateEps first.
inline BoxLoss iou_loss(const CellBox& pred, const CellBox& gt) {
    const CellBox p = clamp_degenerate(pred);
    BoxLoss out;
    out.loss = 1.0 - giou(p, gt);
    const BoxGrad g = detail::giou_gradient(p, gt);
    out.grad = {-g.x0, -g.y0, -g.x1, -g.y1};
    return out;
}

// ---------------------------------------------------------------------------
// Cross entropy over the tag vocabulary

struct CrossEntropyResult {
    double loss = 0.0;
    std::vector<std::vector<double>> grad; // same shape as logits
};

/// Mean token-level negative log softmax probability.
/// grad = (softmax - onehot) / n_positions.
inline CrossEntropyResult cross_entropy(const std::vector<std::vector<double>>& logits,
                                        const std::vector<std::size_t>& targets) {
    if (logits.size() != targets.size())
        throw std::invalid_argument("cross_entropy: logits/targets length mismatch");
    if (logits.empty()) throw std::invalid_argument("cross_entropy: empty input");

    CrossEntropyResult out;
    out.grad.resize(logits.size());
    const double inv_n = 1.0 / static_cast<double>(logits.size());
    for (std::size_t t = 0; t < logits.size(); ++t) {
        const auto& row = logits[t];
        if (targets[t] >= row.size())
            throw std::out_of_range("cross_entropy: target index " +
                                    std::to_string(targets[t]) + " out of range");
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - mx);
        const double logsum = mx + std::log(sum);
        out.loss += (logsum - row[targets[t]]) * inv_n;
        auto& g = out.grad[t];
        g.resize(row.size());
        for (std::size_t k = 0; k < row.size(); ++k) {
            const double softmax = std::exp(row[k] - logsum);
            g[k] = (softmax - (k == targets[t] ? 1.0 : 0.0)) * inv_n;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Total multi-task loss

/// Combines the structure loss with per-cell box losses:
/// l_box = mean(lambda_iou * l_iou + lambda_l1 * l_1), l = lambda * l_s +
/// (1 - lambda) * l_box. An empty cell list contributes l_box = 0.
inline double total_loss(double l_s,
                         const std::vector<std::pair<double, double>>& box_losses,
                         const LossWeights& w) {
    double l_box = 0.0;
    if (!box_losses.empty()) {
        for (const auto& [l_iou, l_1] : box_losses)
            l_box += w.lambda_iou * l_iou + w.lambda_l1 * l_1;
        l_box /= static_cast<double>(box_losses.size());
    }
    return w.lambda * l_s + (1.0 - w.lambda) * l_box;
}

} // namespace tableforge
