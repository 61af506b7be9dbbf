#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tableforge/dataset_io.hpp"
#include "tableforge/errors.hpp"
#include "tableforge/geometry.hpp"
#include "tableforge/structure.hpp"

namespace tableforge {

/// Text fragment extracted from a programmatic PDF.
struct PdfCell {
    CellBox box;
    std::string content;
};

/// Model output for one table: structure tokens plus one box per td cell,
/// in document order.
struct Prediction {
    TagSequence tags;
    std::vector<CellBox> boxes;
};

enum class Alignment { left, centroid, right };

inline std::string_view to_string(Alignment a) {
    switch (a) {
        case Alignment::left: return "left";
        case Alignment::centroid: return "centroid";
        default: return "right";
    }
}

/// Picks the alignment whose x-coordinate has the smallest spread
/// D_c = max{x_c} - min{x_c} over the boxes. Ties prefer left, then
/// centroid, then right.
inline Alignment find_alignment(const std::vector<CellBox>& column_boxes) {
    if (column_boxes.empty()) throw Error("find_alignment: no boxes");
    double lo[3], hi[3];
    for (int c = 0; c < 3; ++c) {
        lo[c] = std::numeric_limits<double>::infinity();
        hi[c] = -std::numeric_limits<double>::infinity();
    }
    for (const auto& b : column_boxes) {
        const double xs[3] = {b.x0, b.cx(), b.x1}; // left, centroid, right
        for (int c = 0; c < 3; ++c) {
            lo[c] = std::min(lo[c], xs[c]);
            hi[c] = std::max(hi[c], xs[c]);
        }
    }
    const double spread[3] = {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]};
    if (spread[0] <= spread[1] && spread[0] <= spread[2]) return Alignment::left;
    if (spread[1] <= spread[2]) return Alignment::centroid;
    return Alignment::right;
}

/// Table after post-processing: final structure, per-cell corrected boxes
/// and matched PDF fragments, plus the per-step audit trail.
struct MatchedTable {
    TableGrid grid;
    std::vector<CellBox> corrected_boxes;               // per grid cell
    std::vector<std::vector<std::size_t>> cell_content; // pdf indices per grid cell
    std::vector<std::pair<std::size_t, int>> dropped_pdf; // (pdf index, discarded column)
    ordered_json audit = ordered_json::array();

    TagSequence tags() const { return grid_to_tokens(grid); }

    std::vector<std::string> contents(const std::vector<PdfCell>& pdf) const {
        std::vector<std::string> out(grid.cells.size());
        for (std::size_t i = 0; i < grid.cells.size(); ++i) {
            std::string text;
            for (std::size_t k = 0; k < cell_content[i].size(); ++k) {
                if (k) text += ' ';
                text += pdf[cell_content[i][k]].content;
            }
            out[i] = std::move(text);
        }
        return out;
    }

    std::string to_html(const std::vector<PdfCell>& pdf) const {
        return tags().to_html(contents(pdf));
    }

    TableRecord to_record(const std::vector<PdfCell>& pdf, std::string id) const {
        TableRecord r;
        r.id = std::move(id);
        r.tags = tags();
        r.cells.resize(grid.cells.size());
        for (std::size_t i = 0; i < grid.cells.size(); ++i) {
            for (std::size_t p : cell_content[i])
                r.cells[i].tokens.push_back(pdf[p].content);
            r.cells[i].bbox = corrected_boxes[i];
            r.cells[i].klass =
                cell_content[i].empty() ? CellKlass::empty : CellKlass::content;
            r.cells[i].bbox->klass = r.cells[i].klass;
        }
        finalize_record(r);
        return r;
    }
};

// ---------------------------------------------------------------------------

namespace detail {

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Snap targets live on a 2^-20 pixel grid. Snapped corners then combine
/// exactly in double arithmetic, so the coordinates measured back from a
/// snapped box reproduce the medians bit-for-bit and re-running the
/// pipeline on its own output cannot drift.
inline double quantize(double v) {
    return std::round(v * 1048576.0) / 1048576.0;
}

struct WorkCell {
    GridCell cell;
    CellBox box;
    bool good = false;
    bool alive = true;
};

/// Grid of the currently alive cells, plus uid <-> grid index mappings.
struct WorkGrid {
    TableGrid grid;
    std::vector<std::size_t> uid_of;  // grid cell index -> uid
    std::vector<std::int32_t> index_of; // uid -> grid cell index or -1
};

inline WorkGrid materialize(const std::vector<WorkCell>& cells, int n_rows, int n_cols,
                            int header_rows, bool sections) {
    WorkGrid wg;
    wg.grid.n_rows = n_rows;
    wg.grid.n_cols = n_cols;
    wg.grid.header_rows = header_rows;
    wg.grid.sections = sections;
    wg.grid.squares.assign(static_cast<std::size_t>(n_rows) * n_cols, -1);
    wg.index_of.assign(cells.size(), -1);

    std::vector<std::size_t> order;
    for (std::size_t uid = 0; uid < cells.size(); ++uid)
        if (cells[uid].alive) order.push_back(uid);
    std::sort(order.begin(), order.end(), [&cells](std::size_t a, std::size_t b) {
        const auto& ca = cells[a].cell;
        const auto& cb = cells[b].cell;
        if (ca.row != cb.row) return ca.row < cb.row;
        return ca.col < cb.col;
    });
    for (std::size_t uid : order) {
        const auto idx = static_cast<std::int32_t>(wg.grid.cells.size());
        const GridCell& c = cells[uid].cell;
        wg.grid.cells.push_back(c);
        wg.uid_of.push_back(uid);
        wg.index_of[uid] = idx;
        for (int r = c.row; r < c.row + c.rowspan; ++r)
            for (int cc = c.col; cc < c.col + c.colspan; ++cc) wg.grid.square(r, cc) = idx;
    }
    return wg;
}

/// Removes grid column j in place: cells anchored there with colspan 1 die,
/// wider cells shrink, anchors to the right shift left.
inline void remove_column(std::vector<WorkCell>& cells, int j) {
    for (auto& wc : cells) {
        if (!wc.alive) continue;
        GridCell& c = wc.cell;
        if (c.col <= j && j < c.col + c.colspan) {
            if (c.colspan == 1) {
                wc.alive = false;
                continue;
            }
            c.colspan -= 1;
        } else if (c.col > j) {
            c.col -= 1;
        }
    }
}

} // namespace detail

// ---------------------------------------------------------------------------

/// The full prediction post-processing pipeline:
///  1. minimal grid from the predicted tokens
///  2. pairwise IoU of predicted vs PDF boxes
///  3. good/bad split at the threshold; 3a. columns with no good cell are
///     discarded, PDF cells whose only positive matches pointed there are
///     dropped with the column
///  4. per-column content alignment (argmin of coordinate spread)
///  5. per-column median of the alignment coordinate and median cell size
///  6. bad cells snapped to the column median coordinate and size
///  7. re-match on modified IoU, each PDF cell going to its highest scorer
///  8. adjacent predicted columns occupying the same x-band are merged,
///     keeping the higher total intersection score
///  9. orphan PDF cells mapped through row/column band overlap: appended to
///     a non-empty cell, materializing or creating a cell otherwise
inline MatchedTable postprocess(const Prediction& pred,
                                const std::vector<PdfCell>& pdf_cells,
                                double iou_threshold = 0.5) {
    if (iou_threshold <= 0.0 || iou_threshold >= 1.0)
        throw Error("iou threshold must be inside (0, 1)");
    for (const auto& p : pdf_cells)
        if (!p.box.valid()) throw Error("degenerate PDF cell box");

    MatchedTable out;

    // step 1: minimal grid
    const TableGrid grid0 = tokens_to_grid(pred.tags);
    if (grid0.cells.empty()) throw EmptyPredictionError("prediction has no cells");
    if (pred.boxes.size() != grid0.cells.size())
        throw Error("prediction carries " + std::to_string(pred.boxes.size()) +
                    " boxes for " + std::to_string(grid0.cells.size()) + " cells");

    std::vector<detail::WorkCell> cells(grid0.cells.size());
    for (std::size_t i = 0; i < grid0.cells.size(); ++i) {
        cells[i].cell = grid0.cells[i];
        cells[i].box = pred.boxes[i];
    }
    const std::size_t n_pdf = pdf_cells.size();

    // step 2: pairwise IoU
    std::vector<std::vector<double>> iou_matrix(cells.size(), std::vector<double>(n_pdf, 0.0));
    for (std::size_t i = 0; i < cells.size(); ++i)
        for (std::size_t p = 0; p < n_pdf; ++p)
            iou_matrix[i][p] = iou(cells[i].box, pdf_cells[p].box);

    // step 3: good/bad split
    std::size_t n_good = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        double best = 0.0;
        for (std::size_t p = 0; p < n_pdf; ++p) best = std::max(best, iou_matrix[i][p]);
        cells[i].good = best >= iou_threshold;
        if (cells[i].good) ++n_good;
    }
    out.audit.push_back({{"step", 3},
                         {"what", "iou split"},
                         {"threshold", iou_threshold},
                         {"good", n_good},
                         {"bad", cells.size() - n_good}});

    // step 3a: discard columns with no good cell
    int n_cols = grid0.n_cols;
    std::vector<int> discarded;
    {
        std::vector<char> col_good(n_cols, 0);
        for (const auto& wc : cells)
            if (wc.good)
                for (int c = wc.cell.col; c < wc.cell.col + wc.cell.colspan; ++c)
                    col_good[c] = 1;
        for (int c = 0; c < n_cols; ++c)
            if (!col_good[c]) discarded.push_back(c);
        if (static_cast<int>(discarded.size()) == n_cols)
            throw AllColumnsDiscardedError("no column has a match above the threshold");

        // PDF cells whose positive matches all sit in discarded columns go
        // with the column of their best match
        std::vector<char> col_discarded(n_cols, 0);
        for (int c : discarded) col_discarded[c] = 1;
        for (std::size_t p = 0; p < n_pdf; ++p) {
            double best = 0.0;
            int best_col = -1;
            bool only_discarded = true;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (iou_matrix[i][p] <= 0.0) continue;
                bool in_discarded = true;
                for (int c = cells[i].cell.col;
                     c < cells[i].cell.col + cells[i].cell.colspan; ++c)
                    if (!col_discarded[c]) in_discarded = false;
                if (!in_discarded) only_discarded = false;
                if (iou_matrix[i][p] > best) {
                    best = iou_matrix[i][p];
                    best_col = cells[i].cell.col;
                }
            }
            if (best > 0.0 && only_discarded)
                out.dropped_pdf.emplace_back(p, best_col);
        }

        for (auto it = discarded.rbegin(); it != discarded.rend(); ++it)
            detail::remove_column(cells, *it);
        n_cols -= static_cast<int>(discarded.size());

        ordered_json detail_json = ordered_json::array();
        for (int c : discarded) detail_json.push_back(c);
        out.audit.push_back({{"step", "3a"},
                             {"what", "discarded columns"},
                             {"columns", detail_json},
                             {"dropped_pdf_cells", out.dropped_pdf.size()}});
    }
    std::vector<char> pdf_dropped(n_pdf, 0);
    for (const auto& [p, col] : out.dropped_pdf) pdf_dropped[p] = 1;

    // steps 4-5: per-column alignment, medians of the alignment coordinate
    // and of the cell size. Evidence comes from plain (1x1) good cells
    // anchored in the column; spanning cells would skew both the spread and
    // the size medians, so they only serve as fallback evidence when a
    // column has no plain good cell at all.
    std::vector<Alignment> alignment(n_cols, Alignment::left);
    std::vector<double> med_x(n_cols, 0.0), med_w(n_cols, 0.0), med_h(n_cols, 0.0);
    {
        ordered_json cols_json = ordered_json::array();
        for (int c = 0; c < n_cols; ++c) {
            std::vector<CellBox> evidence;
            for (const auto& wc : cells)
                if (wc.alive && wc.good && wc.cell.col == c && wc.cell.colspan == 1 &&
                    wc.cell.rowspan == 1)
                    evidence.push_back(wc.box);
            if (evidence.empty()) {
                for (const auto& wc : cells)
                    if (wc.alive && wc.good && wc.cell.col == c) evidence.push_back(wc.box);
            }
            if (evidence.empty()) {
                for (const auto& wc : cells)
                    if (wc.alive && wc.good && wc.cell.col <= c &&
                        c < wc.cell.col + wc.cell.colspan)
                        evidence.push_back(wc.box);
            }
            alignment[c] = find_alignment(evidence);
            std::vector<double> xs, ws, hs;
            for (const auto& b : evidence) {
                switch (alignment[c]) {
                    case Alignment::left: xs.push_back(b.x0); break;
                    case Alignment::centroid: xs.push_back(b.cx()); break;
                    case Alignment::right: xs.push_back(b.x1); break;
                }
                ws.push_back(b.width());
                hs.push_back(b.height());
            }
            med_x[c] = detail::quantize(detail::median(std::move(xs)));
            med_w[c] = detail::quantize(detail::median(std::move(ws)));
            med_h[c] = detail::quantize(detail::median(std::move(hs)));
            cols_json.push_back({{"column", c},
                                 {"alignment", std::string(to_string(alignment[c]))},
                                 {"median_x", med_x[c]},
                                 {"median_w", med_w[c]},
                                 {"median_h", med_h[c]}});
        }
        out.audit.push_back({{"step", 4}, {"what", "column alignment"}, {"columns", cols_json}});
    }

    // step 6: snap bad cells to their column medians. The anchor column's
    // alignment places the left edge; spanning cells extend over the median
    // widths/heights of everything they cover. y keeps the predicted top
    // edge. All targets are dyadic-grid values, so re-snapping an already
    // snapped box reproduces it exactly.
    {
        std::size_t snapped = 0;
        for (auto& wc : cells) {
            if (!wc.alive || wc.good) continue;
            const int c = wc.cell.col;
            double width = 0.0;
            for (int k = c; k < c + wc.cell.colspan; ++k) width += med_w[k];
            const double height = wc.cell.rowspan * med_h[c];
            switch (alignment[c]) {
                case Alignment::left: wc.box.x0 = med_x[c]; break;
                case Alignment::centroid: wc.box.x0 = med_x[c] - 0.5 * med_w[c]; break;
                case Alignment::right: wc.box.x0 = med_x[c] - med_w[c]; break;
            }
            wc.box.x1 = wc.box.x0 + width;
            wc.box.y0 = detail::quantize(wc.box.y0);
            wc.box.y1 = wc.box.y0 + height;
            ++snapped;
        }
        out.audit.push_back({{"step", 6}, {"what", "snapped bad cells"}, {"count", snapped}});
    }

    // step 7: re-match with modified IoU; each PDF cell goes to its highest
    // scoring prediction (ties to the lower cell uid)
    std::vector<std::int64_t> assignment(n_pdf, -1); // pdf -> uid
    {
        std::size_t matched = 0;
        for (std::size_t p = 0; p < n_pdf; ++p) {
            if (pdf_dropped[p]) continue;
            double best = 0.0;
            std::int64_t best_uid = -1;
            for (std::size_t uid = 0; uid < cells.size(); ++uid) {
                if (!cells[uid].alive) continue;
                const double score = modified_iou(cells[uid].box, pdf_cells[p].box);
                if (score > best) {
                    best = score;
                    best_uid = static_cast<std::int64_t>(uid);
                }
            }
            if (best > 0.0) {
                assignment[p] = best_uid;
                ++matched;
            }
        }
        out.audit.push_back({{"step", 7}, {"what", "modified-iou match"}, {"matched", matched}});
    }

    // step 8: de-duplicate adjacent columns occupying the same x-band
    {
        ordered_json merges = ordered_json::array();
        bool merged = true;
        int rounds = 0;
        while (merged && rounds++ <= grid0.n_cols) {
            merged = false;
            // column x-intervals from the corrected boxes of anchored cells
            std::vector<double> span_lo(n_cols), span_hi(n_cols);
            std::vector<bool> has_cells(n_cols, false);
            for (int c = 0; c < n_cols; ++c) {
                std::vector<double> x0s, x1s;
                for (const auto& wc : cells)
                    if (wc.alive && wc.cell.col == c && wc.cell.colspan == 1) {
                        x0s.push_back(wc.box.x0);
                        x1s.push_back(wc.box.x1);
                    }
                if (x0s.empty()) continue;
                has_cells[c] = true;
                span_lo[c] = detail::median(std::move(x0s));
                span_hi[c] = detail::median(std::move(x1s));
            }
            for (int c = 0; c + 1 < n_cols && !merged; ++c) {
                if (!has_cells[c] || !has_cells[c + 1]) continue;
                const double overlap =
                    interval_overlap(span_lo[c], span_hi[c], span_lo[c + 1], span_hi[c + 1]);
                const double narrower =
                    std::min(span_hi[c] - span_lo[c], span_hi[c + 1] - span_lo[c + 1]);
                if (narrower <= 0.0 || overlap / narrower <= 0.5) continue;

                // total column intersection score: sum over anchored cells of
                // their best modified-IoU match
                double score[2] = {0.0, 0.0};
                for (int k = 0; k < 2; ++k) {
                    for (const auto& wc : cells) {
                        if (!wc.alive || wc.cell.col != c + k) continue;
                        double best = 0.0;
                        for (std::size_t p = 0; p < n_pdf; ++p)
                            if (!pdf_dropped[p])
                                best = std::max(best,
                                                modified_iou(wc.box, pdf_cells[p].box));
                        score[k] += best;
                    }
                }
                const int loser = score[0] >= score[1] ? c + 1 : c;
                const int winner = loser == c ? c + 1 : c;

                // move the loser's matched PDF cells to the winner cell of
                // the same row before the structure change; with no winner
                // cell on that row (non-strict input) the PDF cell goes back
                // to the orphan pool for step 9
                for (std::size_t p = 0; p < n_pdf; ++p) {
                    const auto uid = assignment[p];
                    if (uid < 0 || !cells[uid].alive) continue;
                    const GridCell& dying = cells[uid].cell;
                    if (dying.col == loser && dying.colspan == 1) {
                        std::int64_t target = -1;
                        for (std::size_t u2 = 0; u2 < cells.size(); ++u2) {
                            if (!cells[u2].alive || u2 == static_cast<std::size_t>(uid))
                                continue;
                            const GridCell& g2 = cells[u2].cell;
                            if (g2.col <= winner && winner < g2.col + g2.colspan &&
                                g2.row <= dying.row && dying.row < g2.row + g2.rowspan) {
                                target = static_cast<std::int64_t>(u2);
                                break;
                            }
                        }
                        assignment[p] = target;
                    }
                }
                detail::remove_column(cells, loser);
                n_cols -= 1;
                merges.push_back({{"winner", winner},
                                  {"loser", loser},
                                  {"scores", {score[0], score[1]}}});
                merged = true;
            }
        }
        out.audit.push_back({{"step", 8}, {"what", "column de-duplication"}, {"merges", merges}});
    }

    // step 9: orphan PDF cells mapped through the band geometry
    detail::WorkGrid wg =
        detail::materialize(cells, grid0.n_rows, n_cols, grid0.header_rows, grid0.sections);
    {
        constexpr double kInf = std::numeric_limits<double>::infinity();
        std::vector<double> row_top(grid0.n_rows, kInf), row_bot(grid0.n_rows, -kInf);
        std::vector<double> col_lo(n_cols, kInf), col_hi(n_cols, -kInf);
        for (const auto& wc : cells) {
            if (!wc.alive) continue;
            for (int r = wc.cell.row; r < wc.cell.row + wc.cell.rowspan; ++r) {
                row_top[r] = std::min(row_top[r], wc.box.y0);
                row_bot[r] = std::max(row_bot[r], wc.box.y1);
            }
            for (int c = wc.cell.col; c < wc.cell.col + wc.cell.colspan; ++c) {
                col_lo[c] = std::min(col_lo[c], wc.box.x0);
                col_hi[c] = std::max(col_hi[c], wc.box.x1);
            }
        }
        auto nearest_band = [](double lo, double hi, const std::vector<double>& band_lo,
                               const std::vector<double>& band_hi) {
            int best = 0;
            double best_overlap = -1.0;
            for (std::size_t b = 0; b < band_lo.size(); ++b) {
                if (band_lo[b] > band_hi[b]) continue; // band without cells
                const double ov = interval_overlap(lo, hi, band_lo[b], band_hi[b]);
                if (ov > best_overlap) {
                    best_overlap = ov;
                    best = static_cast<int>(b);
                }
            }
            if (best_overlap > 0.0) return best;
            // no overlap anywhere: closest band by gap distance
            double best_gap = kInf;
            for (std::size_t b = 0; b < band_lo.size(); ++b) {
                if (band_lo[b] > band_hi[b]) continue;
                const double gap = interval_gap(lo, hi, band_lo[b], band_hi[b]);
                if (gap < best_gap) {
                    best_gap = gap;
                    best = static_cast<int>(b);
                }
            }
            return best;
        };

        ordered_json orphans = ordered_json::array();
        for (std::size_t p = 0; p < n_pdf; ++p) {
            if (pdf_dropped[p] || assignment[p] >= 0) continue;
            const auto& box = pdf_cells[p].box;
            const int r = nearest_band(box.y0, box.y1, row_top, row_bot);
            const int c = nearest_band(box.x0, box.x1, col_lo, col_hi);
            const std::int32_t idx = wg.grid.square(r, c);
            ordered_json entry{{"pdf", p}, {"row", r}, {"col", c}};
            if (idx >= 0) {
                const std::size_t uid = wg.uid_of[idx];
                bool non_empty = false;
                for (std::size_t q = 0; q < n_pdf && !non_empty; ++q)
                    if (q != p && assignment[q] == static_cast<std::int64_t>(uid))
                        non_empty = true;
                assignment[p] = static_cast<std::int64_t>(uid);
                entry["action"] = non_empty ? "appended" : "materialized";
            } else {
                detail::WorkCell fresh;
                fresh.cell = GridCell{r, c, 1, 1, r < grid0.header_rows};
                fresh.box = box;
                fresh.good = true;
                cells.push_back(fresh);
                assignment[p] = static_cast<std::int64_t>(cells.size() - 1);
                entry["action"] = "created";
                wg = detail::materialize(cells, grid0.n_rows, n_cols, grid0.header_rows,
                                         grid0.sections);
            }
            orphans.push_back(std::move(entry));
        }
        out.audit.push_back({{"step", 9}, {"what", "orphan assignment"}, {"orphans", orphans}});
    }

    wg = detail::materialize(cells, grid0.n_rows, n_cols, grid0.header_rows, grid0.sections);
    out.grid = wg.grid;
    out.corrected_boxes.resize(wg.grid.cells.size());
    out.cell_content.assign(wg.grid.cells.size(), {});
    for (std::size_t i = 0; i < wg.grid.cells.size(); ++i) {
        out.corrected_boxes[i] = cells[wg.uid_of[i]].box;
        out.corrected_boxes[i].klass = CellKlass::empty;
    }
    for (std::size_t p = 0; p < n_pdf; ++p) {
        if (assignment[p] < 0) continue;
        const auto idx = wg.index_of[static_cast<std::size_t>(assignment[p])];
        out.cell_content[idx].push_back(p);
        out.corrected_boxes[idx].klass = CellKlass::content;
    }
    return out;
}

} // namespace tableforge
