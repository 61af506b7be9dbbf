#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tableforge/errors.hpp"
#include "tableforge/parallel.hpp"
#include "tableforge/structure.hpp"
#include "tableforge/text.hpp"

namespace tableforge {

/// Node of a rooted ordered table tree. Only td nodes carry content and
/// span attributes.
struct TreeNode {
    std::string label;
    int rowspan = 1;
    int colspan = 1;
    std::string content;
    std::vector<TreeNode> children;
};

struct TableTree {
    TreeNode root;

    std::size_t size() const {
        std::size_t n = 0;
        count(root, n);
        return n;
    }

    bool has_span() const { return has_span_rec(root); }

private:
    static void count(const TreeNode& node, std::size_t& n) {
        ++n;
        for (const auto& c : node.children) count(c, n);
    }
    static bool has_span_rec(const TreeNode& node) {
        if (node.rowspan != 1 || node.colspan != 1) return true;
        for (const auto& c : node.children)
            if (has_span_rec(c)) return true;
        return false;
    }
};

/// Builds the tree from structural tokens plus per-cell content strings.
/// The tree mirrors the token nesting: table -> (thead|tbody)? -> tr -> td.
inline TableTree tree_from_tokens(const TagSequence& tags,
                                  const std::vector<std::string>& contents) {
    tags.validate();
    if (contents.size() != tags.n_cells())
        throw Error("tree_from_tokens: content count mismatch");

    TableTree tree;
    tree.root.label = "table";
    std::vector<TreeNode*> stack{&tree.root};
    std::size_t cell = 0;
    int pending_rowspan = 1, pending_colspan = 1;
    TokenKind pending_attr = TokenKind::TdOpen;

    auto open_child = [&stack](const char* label) {
        TreeNode child;
        child.label = label;
        stack.back()->children.push_back(std::move(child));
        stack.push_back(&stack.back()->children.back());
    };

    for (const auto& t : tags.tokens()) {
        switch (t.kind) {
            case TokenKind::TheadOpen: open_child("thead"); break;
            case TokenKind::TbodyOpen: open_child("tbody"); break;
            case TokenKind::TrOpen: open_child("tr"); break;
            case TokenKind::TdOpen:
            case TokenKind::CellOpenBracket:
                open_child("td");
                pending_rowspan = 1;
                pending_colspan = 1;
                break;
            case TokenKind::RowspanAttr:
            case TokenKind::ColspanAttr:
                pending_attr = t.kind;
                break;
            case TokenKind::SpanValue:
                if (pending_attr == TokenKind::RowspanAttr) pending_rowspan = t.value;
                else pending_colspan = t.value;
                break;
            case TokenKind::TdClose: {
                TreeNode* td = stack.back();
                td->rowspan = pending_rowspan;
                td->colspan = pending_colspan;
                td->content = contents[cell++];
                stack.pop_back();
                pending_rowspan = 1;
                pending_colspan = 1;
                break;
            }
            case TokenKind::TheadClose:
            case TokenKind::TbodyClose:
            case TokenKind::TrClose:
                stack.pop_back();
                break;
            case TokenKind::TableOpen:
            case TokenKind::TableClose:
            case TokenKind::CloseBracket:
                break;
        }
    }
    return tree;
}

/// Builds the tree straight from an HTML fragment.
inline TableTree tree_from_html(std::string_view html) {
    ParsedTable parsed = parse_html_with_content(html);
    return tree_from_tokens(parsed.tags, parsed.cell_text);
}

// ---------------------------------------------------------------------------
// Edit cost model

/// Unit insert/delete costs; relabel compares labels and td attributes, and
/// scores td content by normalized Levenshtein distance. structure_only
/// ignores content, attributes still count.
struct EditCostModel {
    double insert_cost = 1.0;
    double delete_cost = 1.0;
    bool structure_only = false;
    bool normalize_content = false; // compatibility-normalize text first

    double relabel(const TreeNode& a, const TreeNode& b) const {
        if (a.label != b.label) return 1.0;
        if (a.label == "td") {
            if (a.rowspan != b.rowspan || a.colspan != b.colspan) return 1.0;
            if (structure_only) return 0.0;
            if (normalize_content)
                return levenshtein_norm(normalize_compat(a.content),
                                        normalize_compat(b.content));
            return levenshtein_norm(a.content, b.content);
        }
        return 0.0;
    }
};

// ---------------------------------------------------------------------------
// Zhang-Shasha ordered tree edit distance

namespace detail {

struct FlatTree {
    std::vector<const TreeNode*> post; // postorder
    std::vector<int> lml;              // leftmost leaf descendant, postorder index
    std::vector<int> keyroots;

    explicit FlatTree(const TreeNode& root) {
        build(root);
        const int n = static_cast<int>(post.size());
        std::vector<char> seen(n, 0);
        for (int i = n - 1; i >= 0; --i) {
            if (!seen[lml[i]]) {
                keyroots.push_back(i);
                seen[lml[i]] = 1;
            }
        }
        std::sort(keyroots.begin(), keyroots.end());
    }

private:
    int build(const TreeNode& node) {
        int leftmost = -1;
        for (const auto& c : node.children) {
            const int l = build(c);
            if (leftmost < 0) leftmost = l;
        }
        const int idx = static_cast<int>(post.size());
        post.push_back(&node);
        lml.push_back(leftmost < 0 ? idx : leftmost);
        return lml.back();
    }
};

} // namespace detail

/// Minimal total cost of node insertions, deletions and relabelings turning
/// `a` into `b`. Exact ordered-tree edit distance via keyroot decomposition.
inline double tree_edit_distance(const TableTree& a, const TableTree& b,
                                 const EditCostModel& cost = {}) {
    const detail::FlatTree ta(a.root);
    const detail::FlatTree tb(b.root);
    const int n = static_cast<int>(ta.post.size());
    const int m = static_cast<int>(tb.post.size());

    std::vector<std::vector<double>> treedist(n, std::vector<double>(m, 0.0));
    // forest distance scratch, (n+1) x (m+1)
    std::vector<std::vector<double>> fd(n + 1, std::vector<double>(m + 1, 0.0));

    for (int ki : ta.keyroots) {
        for (int kj : tb.keyroots) {
            const int li = ta.lml[ki];
            const int lj = tb.lml[kj];
            fd[li][lj] = 0.0;
            for (int i = li; i <= ki; ++i)
                fd[i + 1][lj] = fd[i][lj] + cost.delete_cost;
            for (int j = lj; j <= kj; ++j)
                fd[li][j + 1] = fd[li][j] + cost.insert_cost;
            for (int i = li; i <= ki; ++i) {
                for (int j = lj; j <= kj; ++j) {
                    if (ta.lml[i] == li && tb.lml[j] == lj) {
                        const double rel =
                            cost.relabel(*ta.post[i], *tb.post[j]);
                        fd[i + 1][j + 1] = std::min(
                            {fd[i][j + 1] + cost.delete_cost,
                             fd[i + 1][j] + cost.insert_cost, fd[i][j] + rel});
                        treedist[i][j] = fd[i + 1][j + 1];
                    } else {
                        fd[i + 1][j + 1] = std::min(
                            {fd[i][j + 1] + cost.delete_cost,
                             fd[i + 1][j] + cost.insert_cost,
                             fd[ta.lml[i]][tb.lml[j]] + treedist[i][j]});
                    }
                }
            }
        }
    }
    return treedist[n - 1][m - 1];
}

/// Tree-edit-distance similarity: 1 - EditDist(a, b) / max(|a|, |b|).
/// The edit distance of structurally incompatible trees can exceed the
/// larger node count, so the score is clamped at 0.
inline double teds(const TableTree& a, const TableTree& b, bool structure_only = false,
                   bool normalize_content = false) {
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    if (na == 0 || nb == 0) throw Error("empty-tree: teds requires non-empty trees");
    EditCostModel cost;
    cost.structure_only = structure_only;
    cost.normalize_content = normalize_content;
    const double dist = tree_edit_distance(a, b, cost);
    return std::max(0.0, 1.0 - dist / static_cast<double>(std::max(na, nb)));
}

// ---------------------------------------------------------------------------
// Batch scoring

struct TedsSummary {
    double mean = 0.0;
    std::optional<double> simple_mean;
    std::optional<double> complex_mean;
    std::size_t n = 0;
};

/// Mean TEDS over pairs plus means grouped by ground-truth complexity
/// (a ground-truth tree with any span attribute counts as complex).
/// Pairs are scored in parallel; sums are accumulated in index order, so
/// the result does not depend on the worker count.
inline TedsSummary teds_batch(
    const std::vector<std::pair<const TableTree*, const TableTree*>>& pairs,
    bool structure_only = false, bool normalize_content = false) {
    if (pairs.empty()) throw Error("teds_batch: empty pair list");

    std::vector<double> scores(pairs.size(), 0.0);
    std::vector<char> complex_flag(pairs.size(), 0);
    parallel_for_index(pairs.size(), [&](std::size_t i) {
        const auto& [gt, pred] = pairs[i];
        scores[i] = teds(*gt, *pred, structure_only, normalize_content);
        complex_flag[i] = gt->has_span() ? 1 : 0;
    });

    TedsSummary out;
    out.n = pairs.size();
    double sum = 0.0, simple_sum = 0.0, complex_sum = 0.0;
    std::size_t n_simple = 0, n_complex = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        sum += scores[i];
        if (complex_flag[i]) {
            complex_sum += scores[i];
            ++n_complex;
        } else {
            simple_sum += scores[i];
            ++n_simple;
        }
    }
    out.mean = sum / static_cast<double>(out.n);
    if (n_simple > 0) out.simple_mean = simple_sum / static_cast<double>(n_simple);
    if (n_complex > 0) out.complex_mean = complex_sum / static_cast<double>(n_complex);
    return out;
}

} // namespace tableforge
