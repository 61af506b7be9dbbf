#pragma once

#include <algorithm>
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

/// Border lines between grid rows and columns. row_bounds has n_rows + 1
/// strictly increasing y coordinates, col_bounds n_cols + 1 x coordinates.
struct GridGeometry {
    std::vector<double> row_bounds;
    std::vector<double> col_bounds;

    CellBox band_box(int row, int col, int rowspan = 1, int colspan = 1) const {
        return CellBox{col_bounds[col], row_bounds[row], col_bounds[col + colspan],
                       row_bounds[row + rowspan]};
    }
};

/// Derives the border lines of a strict grid from the known boxes.
/// An interior column border is the midpoint between the rightmost known
/// edge of the left band and the leftmost known edge of the right band;
/// outer borders are the extreme edges over all known boxes. A spanning
/// cell contributes edge evidence only at the bands it starts and ends in,
/// its interior crosses the borders being estimated.
inline GridGeometry derive_borders(const TableGrid& grid,
                                   const std::map<std::size_t, CellBox>& known) {
    if (!is_strict(grid))
        throw NonStrictTableError("border derivation requires a strict grid");
    if (known.empty()) throw InsufficientCoverageError("no known boxes");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> col_left(grid.n_cols, kInf), col_right(grid.n_cols, -kInf);
    std::vector<double> row_top(grid.n_rows, kInf), row_bottom(grid.n_rows, -kInf);

    for (const auto& [index, box] : known) {
        if (index >= grid.cells.size())
            throw Error("known box for cell " + std::to_string(index) + " out of range");
        const GridCell& cell = grid.cells[index];
        col_left[cell.col] = std::min(col_left[cell.col], box.x0);
        col_right[cell.col + cell.colspan - 1] =
            std::max(col_right[cell.col + cell.colspan - 1], box.x1);
        row_top[cell.row] = std::min(row_top[cell.row], box.y0);
        row_bottom[cell.row + cell.rowspan - 1] =
            std::max(row_bottom[cell.row + cell.rowspan - 1], box.y1);
    }

    GridGeometry geom;
    geom.col_bounds.resize(grid.n_cols + 1);
    geom.row_bounds.resize(grid.n_rows + 1);

    double min_x = kInf, max_x = -kInf, min_y = kInf, max_y = -kInf;
    for (const auto& [index, box] : known) {
        min_x = std::min(min_x, box.x0);
        max_x = std::max(max_x, box.x1);
        min_y = std::min(min_y, box.y0);
        max_y = std::max(max_y, box.y1);
    }
    geom.col_bounds.front() = min_x;
    geom.col_bounds.back() = max_x;
    geom.row_bounds.front() = min_y;
    geom.row_bounds.back() = max_y;

    for (int j = 1; j < grid.n_cols; ++j) {
        if (col_right[j - 1] == -kInf || col_left[j] == kInf)
            throw InsufficientCoverageError("column band " + std::to_string(j - 1) + "/" +
                                            std::to_string(j) + " has no edge evidence");
        geom.col_bounds[j] = 0.5 * (col_right[j - 1] + col_left[j]);
    }
    for (int i = 1; i < grid.n_rows; ++i) {
        if (row_bottom[i - 1] == -kInf || row_top[i] == kInf)
            throw InsufficientCoverageError("row band " + std::to_string(i - 1) + "/" +
                                            std::to_string(i) + " has no edge evidence");
        geom.row_bounds[i] = 0.5 * (row_bottom[i - 1] + row_top[i]);
    }

    for (std::size_t j = 1; j < geom.col_bounds.size(); ++j)
        if (!(geom.col_bounds[j] > geom.col_bounds[j - 1]))
            throw InsufficientCoverageError("column borders are not increasing");
    for (std::size_t i = 1; i < geom.row_bounds.size(); ++i)
        if (!(geom.row_bounds[i] > geom.row_bounds[i - 1]))
            throw InsufficientCoverageError("row borders are not increasing");
    return geom;
}

/// Fills every missing cell box with the band rectangle of its covered grid
/// squares. Known boxes pass through untouched. `empty_cells` marks cells
/// whose filled box should carry the empty class.
inline std::map<std::size_t, CellBox> fill_missing(
    const TableGrid& grid, const std::map<std::size_t, CellBox>& known,
    const GridGeometry& geom, const std::vector<bool>& empty_cells = {}) {
    std::map<std::size_t, CellBox> out = known;
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        if (out.count(i)) continue;
        const GridCell& cell = grid.cells[i];
        CellBox box = geom.band_box(cell.row, cell.col, cell.rowspan, cell.colspan);
        box.klass = (i < empty_cells.size() && empty_cells[i]) ? CellKlass::empty
                                                               : CellKlass::content;
        out.emplace(i, box);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset-level completion

struct CompletionReport {
    std::size_t total = 0;
    std::size_t already_complete_simple = 0, already_complete_complex = 0;
    std::size_t completed_simple = 0, completed_complex = 0;
    std::size_t dropped_nonstrict_simple = 0, dropped_nonstrict_complex = 0;
    std::size_t dropped_uncoverable_simple = 0, dropped_uncoverable_complex = 0;
    std::vector<std::pair<std::string, std::string>> drops; // (id, reason)

    ordered_json to_json() const {
        ordered_json j;
        j["total"] = total;
        j["already_complete"] = {{"simple", already_complete_simple},
                                 {"complex", already_complete_complex}};
        j["completed"] = {{"simple", completed_simple}, {"complex", completed_complex}};
        j["dropped_non_strict"] = {{"simple", dropped_nonstrict_simple},
                                   {"complex", dropped_nonstrict_complex}};
        j["dropped_insufficient_coverage"] = {{"simple", dropped_uncoverable_simple},
                                              {"complex", dropped_uncoverable_complex}};
        ordered_json drops_json = ordered_json::array();
        for (const auto& [id, reason] : drops)
            drops_json.push_back({{"id", id}, {"reason", reason}});
        j["drops"] = std::move(drops_json);
        return j;
    }
};

/// Completes one record in place. Returns false when the record must be
/// dropped (non-strict, or a band without evidence); the reason goes to
/// `reason_out`.
inline bool complete_record(TableRecord& record, std::string* reason_out = nullptr) {
    const TableGrid grid = tokens_to_grid(record.tags);
    if (!is_strict(grid)) {
        if (reason_out) *reason_out = "non-strict structure";
        return false;
    }
    std::map<std::size_t, CellBox> known;
    std::vector<bool> empty_cells(record.cells.size(), false);
    bool missing = false;
    for (std::size_t i = 0; i < record.cells.size(); ++i) {
        if (record.cells[i].bbox) known.emplace(i, *record.cells[i].bbox);
        else missing = true;
        empty_cells[i] = record.cells[i].klass == CellKlass::empty;
    }
    if (!missing) return true;
    try {
        const GridGeometry geom = derive_borders(grid, known);
        const auto full = fill_missing(grid, known, geom, empty_cells);
        for (std::size_t i = 0; i < record.cells.size(); ++i) {
            if (!record.cells[i].bbox) record.cells[i].bbox = full.at(i);
        }
    } catch (const InsufficientCoverageError& e) {
        if (reason_out) *reason_out = e.what();
        return false;
    }
    return true;
}

/// Strict tables get their missing boxes generated; non-strict tables are
/// dropped. Per-record failures become report entries, never exceptions.
inline std::vector<TableRecord> complete_dataset(std::vector<TableRecord> records,
                                                 CompletionReport* report = nullptr) {
    std::vector<TableRecord> out;
    CompletionReport rep;
    for (auto& record : records) {
        ++rep.total;
        const bool simple = record.complexity == Complexity::simple;
        if (!record.strict) {
            (simple ? rep.dropped_nonstrict_simple : rep.dropped_nonstrict_complex)++;
            rep.drops.emplace_back(record.id, "non-strict structure");
            continue;
        }
        bool had_missing = false;
        for (const auto& c : record.cells)
            if (!c.bbox) had_missing = true;
        std::string reason;
        if (!complete_record(record, &reason)) {
            (simple ? rep.dropped_uncoverable_simple : rep.dropped_uncoverable_complex)++;
            rep.drops.emplace_back(record.id, reason);
            continue;
        }
        if (had_missing) (simple ? rep.completed_simple : rep.completed_complex)++;
        else (simple ? rep.already_complete_simple : rep.already_complete_complex)++;
        out.push_back(std::move(record));
    }
    if (report) *report = std::move(rep);
    return out;
}

} // namespace tableforge
