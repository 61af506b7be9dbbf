#pragma once

#include <algorithm>
#include <cmath>

#include "tableforge/dataset_io.hpp"
#include "tableforge/losses.hpp"
#include "tableforge/rng.hpp"

namespace tableforge {

struct GradientCheck {
    std::string name;
    std::size_t samples = 0;
    double max_rel_err = 0.0;
    bool pass = false;
};

struct SelfTestReport {
    std::vector<GradientCheck> checks;
    bool pass = false;

    ordered_json to_json() const {
        ordered_json j;
        ordered_json list = ordered_json::array();
        for (const auto& c : checks)
            list.push_back({{"name", c.name},
                            {"samples", c.samples},
                            {"max_rel_err", c.max_rel_err},
                            {"pass", c.pass}});
        j["checks"] = std::move(list);
        j["pass"] = pass;
        return j;
    }
};

namespace detail {

inline CellBox selftest_box(Rng& rng) {
    const double x0 = rng.uniform(0.05, 0.6);
    const double y0 = rng.uniform(0.05, 0.6);
    return CellBox{x0, y0, x0 + rng.uniform(0.1, 0.35), y0 + rng.uniform(0.1, 0.35)};
}

inline bool selftest_near_tie(const CellBox& a, const CellBox& b, double margin = 1e-3) {
    const double d[] = {a.x0 - b.x0, a.y0 - b.y0, a.x1 - b.x1, a.y1 - b.y1,
                        std::min(a.x1, b.x1) - std::max(a.x0, b.x0),
                        std::min(a.y1, b.y1) - std::max(a.y0, b.y0)};
    for (double v : d)
        if (std::abs(v) < margin) return true;
    return false;
}

template <typename Fn>
GradientCheck check_box_gradient(const char* name, Fn&& fn, std::size_t samples,
                                 std::uint64_t seed, double tolerance) {
    Rng rng(seed);
    GradientCheck out;
    out.name = name;
    const double h = 1e-6;
    while (out.samples < samples) {
        CellBox pred = selftest_box(rng);
        const CellBox gt = selftest_box(rng);
        if (selftest_near_tie(pred, gt)) continue;
        ++out.samples;
        const BoxLoss result = fn(pred, gt);
        double* coords[4] = {&pred.x0, &pred.y0, &pred.x1, &pred.y1};
        const double analytic[4] = {result.grad.x0, result.grad.y0, result.grad.x1,
                                    result.grad.y1};
        for (int k = 0; k < 4; ++k) {
            const double keep = *coords[k];
            *coords[k] = keep + h;
            const double up = fn(pred, gt).loss;
            *coords[k] = keep - h;
            const double down = fn(pred, gt).loss;
            *coords[k] = keep;
            const double fd = (up - down) / (2.0 * h);
            const double denom = std::max({std::abs(analytic[k]), std::abs(fd), 1e-8});
            out.max_rel_err = std::max(out.max_rel_err, std::abs(analytic[k] - fd) / denom);
        }
    }
    out.pass = out.max_rel_err <= tolerance;
    return out;
}

inline GradientCheck check_cross_entropy(std::size_t samples, std::uint64_t seed,
                                         double tolerance) {
    Rng rng(seed);
    GradientCheck out;
    out.name = "cross_entropy";
    const double h = 1e-6;
    while (out.samples < samples) {
        ++out.samples;
        const std::size_t vocab = static_cast<std::size_t>(rng.uniform_int(2, 12));
        const std::size_t len = static_cast<std::size_t>(rng.uniform_int(1, 4));
        std::vector<std::vector<double>> logits(len, std::vector<double>(vocab));
        std::vector<std::size_t> targets(len);
        for (auto& row : logits)
            for (auto& v : row) v = rng.uniform(-3.0, 3.0);
        for (auto& t : targets)
            t = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(vocab) - 1));
        const CrossEntropyResult r = cross_entropy(logits, targets);
        // probe a couple of random coordinates per sample
        for (int probe = 0; probe < 3; ++probe) {
            const std::size_t i =
                static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(len) - 1));
            const std::size_t k = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(vocab) - 1));
            auto tweaked = logits;
            tweaked[i][k] += h;
            const double up = cross_entropy(tweaked, targets).loss;
            tweaked[i][k] -= 2.0 * h;
            const double down = cross_entropy(tweaked, targets).loss;
            const double fd = (up - down) / (2.0 * h);
            const double denom = std::max({std::abs(r.grad[i][k]), std::abs(fd), 1e-8});
            out.max_rel_err = std::max(out.max_rel_err, std::abs(r.grad[i][k] - fd) / denom);
        }
    }
    out.pass = out.max_rel_err <= tolerance;
    return out;
}

} // namespace detail

/// Finite-difference verification of every analytic gradient, plus the
/// closed-form cross-entropy value. Tolerance is a relative error bound.
inline SelfTestReport losses_selftest(std::size_t samples = 1000, double tolerance = 1e-4) {
    SelfTestReport report;
    report.checks.push_back(detail::check_box_gradient(
        "l1_loss", [](const CellBox& p, const CellBox& g) { return l1_loss(p, g); }, samples,
        0xabcdefULL, tolerance));
    report.checks.push_back(detail::check_box_gradient(
        "iou_loss", [](const CellBox& p, const CellBox& g) { return iou_loss(p, g); },
        samples, 0x123456ULL, tolerance));
    report.checks.push_back(detail::check_cross_entropy(samples, 0x777777ULL, tolerance));

    GradientCheck uniform;
    uniform.name = "uniform_logits_closed_form";
    uniform.samples = 1;
    const std::vector<std::vector<double>> logits(2, std::vector<double>(7, 0.0));
    uniform.max_rel_err =
        std::abs(cross_entropy(logits, {0, 3}).loss - std::log(7.0));
    uniform.pass = uniform.max_rel_err <= 1e-9;
    report.checks.push_back(uniform);

    GradientCheck boundary;
    boundary.name = "total_loss_lambda_boundaries";
    boundary.samples = 2;
    LossWeights w;
    w.lambda = 1.0;
    const double at_one = total_loss(3.5, {{7.0, 7.0}}, w);
    w.lambda = 0.0;
    w.lambda_iou = 1.0;
    w.lambda_l1 = 1.0;
    const double at_zero = total_loss(3.5, {{7.0, 7.0}}, w);
    boundary.max_rel_err =
        std::max(std::abs(at_one - 3.5), std::abs(at_zero - 14.0));
    boundary.pass = boundary.max_rel_err == 0.0;
    report.checks.push_back(boundary);

    report.pass = true;
    for (const auto& c : report.checks) report.pass = report.pass && c.pass;
    return report;
}

} // namespace tableforge
