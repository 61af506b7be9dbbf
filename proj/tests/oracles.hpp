// Test-only reference implementations. Each oracle takes an independent
// route to the value the library computes: the tree edit distance is
// evaluated straight from the Tai mapping definition, average precision by
// enumerating score thresholds, gradients by central differences.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "tableforge/detection.hpp"
#include "tableforge/geometry.hpp"
#include "tableforge/rng.hpp"
#include "tableforge/teds.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// Exhaustive ordered-tree edit distance via Tai mapping enumeration.
//
// A valid mapping is a one-to-one pairing of nodes that preserves both the
// ancestor relation and the left-to-right order. The edit distance equals
// the minimum over all valid mappings of
//   sum(relabel costs) + delete_cost * unmapped_left + insert_cost * unmapped_right.

struct FlatNode {
    const tableforge::TreeNode* node;
    int pre = 0;       // preorder index
    int subtree = 0;   // subtree size (for ancestor tests)
};

inline void flatten(const tableforge::TreeNode& n, std::vector<FlatNode>& out) {
    const int self = static_cast<int>(out.size());
    out.push_back({&n, self, 1});
    for (const auto& c : n.children) {
        const int before = static_cast<int>(out.size());
        flatten(c, out);
        out[self].subtree += static_cast<int>(out.size()) - before;
    }
}

inline bool is_ancestor(const FlatNode& a, const FlatNode& d) {
    return a.pre < d.pre && d.pre < a.pre + a.subtree;
}

inline double tai_mapping_distance(const tableforge::TableTree& ta,
                                   const tableforge::TableTree& tb,
                                   const tableforge::EditCostModel& cost = {}) {
    std::vector<FlatNode> a, b;
    flatten(ta.root, a);
    flatten(tb.root, b);
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> mapping;

    std::function<void(int, int, double)> search = [&](int i, int mapped,
                                                       double relabel_sum) {
        if (i == n) {
            const double total = relabel_sum +
                                 cost.delete_cost * (n - mapped) +
                                 cost.insert_cost * (m - mapped);
            best = std::min(best, total);
            return;
        }
        // leave node i unmapped
        search(i + 1, mapped, relabel_sum);
        // or map it to any compatible node of b
        for (int j = 0; j < m; ++j) {
            bool ok = true;
            for (const auto& [pi, pj] : mapping) {
                if (pj == j) { ok = false; break; }
                const bool anc_a = is_ancestor(a[pi], a[i]);
                const bool anc_b = is_ancestor(b[pj], b[j]);
                if (anc_a != anc_b) { ok = false; break; }
                // nodes are processed in preorder, so a[pi].pre < a[i].pre;
                // order preservation requires pj before j unless ancestors
                if (!anc_a && b[pj].pre >= b[j].pre) { ok = false; break; }
            }
            if (!ok) continue;
            mapping.emplace_back(i, j);
            search(i + 1, mapped + 1, relabel_sum + cost.relabel(*a[i].node, *b[j].node));
            mapping.pop_back();
        }
    };
    search(0, 0, 0.0);
    return best;
}

// ---------------------------------------------------------------------------
// Random small table-ish trees for the oracle equivalence property.

inline tableforge::TreeNode random_tree(tableforge::Rng& rng, int n_nodes) {
    static const char* kLabels[] = {"table", "thead", "tbody", "tr", "td"};
    static const char* kWords[] = {"", "a", "b", "ab", "xy", "q"};

    // random parent array (parent[i] < i keeps it a valid ordered tree)
    std::vector<int> parent(n_nodes, -1);
    for (int i = 1; i < n_nodes; ++i)
        parent[i] = static_cast<int>(rng.uniform_int(0, i - 1));

    std::vector<tableforge::TreeNode> protos(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        protos[i].label = kLabels[rng.uniform_int(0, 4)];
        if (protos[i].label == "td") {
            protos[i].content = kWords[rng.uniform_int(0, 5)];
            if (rng.chance(0.3)) protos[i].rowspan = static_cast<int>(rng.uniform_int(2, 3));
            if (rng.chance(0.3)) protos[i].colspan = static_cast<int>(rng.uniform_int(2, 3));
        }
    }

    std::vector<std::vector<int>> children(n_nodes);
    for (int i = 1; i < n_nodes; ++i) children[parent[i]].push_back(i);
    std::function<tableforge::TreeNode(int)> build = [&](int i) {
        tableforge::TreeNode node = protos[i];
        for (int c : children[i]) node.children.push_back(build(c));
        return node;
    };
    return build(0);
}

// ---------------------------------------------------------------------------
// Average precision by brute-force threshold enumeration.

inline double threshold_sweep_ap(
    const std::vector<std::vector<tableforge::Detection>>& detections,
    const std::vector<std::vector<tableforge::CellBox>>& gts, double iou_thresh) {
    using tableforge::CellBox;
    using tableforge::Detection;

    std::size_t n_gt = 0;
    for (const auto& g : gts) n_gt += g.size();
    if (n_gt == 0) return 0.0;

    std::vector<double> scores;
    for (const auto& image : detections)
        for (const auto& d : image)
            if (d.klass == tableforge::CellKlass::content) scores.push_back(d.score);
    if (scores.empty()) return 0.0;
    std::sort(scores.begin(), scores.end(), std::greater<>());
    scores.erase(std::unique(scores.begin(), scores.end()), scores.end());

    // precision/recall point for every score cutoff
    std::vector<std::pair<double, double>> pr; // (recall, precision)
    for (double cutoff : scores) {
        std::size_t tp = 0, fp = 0;
        for (std::size_t img = 0; img < detections.size(); ++img) {
            std::vector<Detection> kept;
            for (const auto& d : detections[img])
                if (d.klass == tableforge::CellKlass::content && d.score >= cutoff)
                    kept.push_back(d);
            std::stable_sort(kept.begin(), kept.end(),
                             [](const Detection& a, const Detection& b) {
                                 return a.score > b.score;
                             });
            const auto& g = img < gts.size() ? gts[img] : std::vector<CellBox>{};
            std::vector<char> taken(g.size(), 0);
            for (const auto& d : kept) {
                double best = 0.0;
                int best_g = -1;
                for (std::size_t k = 0; k < g.size(); ++k) {
                    if (taken[k]) continue;
                    const double v = tableforge::iou(d.box, g[k]);
                    if (v >= iou_thresh && v > best) {
                        best = v;
                        best_g = static_cast<int>(k);
                    }
                }
                if (best_g >= 0) {
                    taken[best_g] = 1;
                    ++tp;
                } else {
                    ++fp;
                }
            }
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_gt);
        const double precision =
            tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        pr.emplace_back(recall, precision);
    }

    std::sort(pr.begin(), pr.end());
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < pr.size(); ++i) {
        double p_max = 0.0;
        for (std::size_t j = i; j < pr.size(); ++j) p_max = std::max(p_max, pr[j].second);
        if (pr[i].first > prev_recall) {
            ap += (pr[i].first - prev_recall) * p_max;
            prev_recall = pr[i].first;
        }
    }
    return ap;
}

// ---------------------------------------------------------------------------
// Central finite differences.

inline double central_difference(const std::function<double(double)>& f, double x,
                                 double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double got, double want) {
    const double denom = std::max({std::abs(got), std::abs(want), 1e-8});
    return std::abs(got - want) / denom;
}

} // namespace oracles
