#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "tableforge/bbox_complete.hpp"
#include "tableforge/dataset_io.hpp"
#include "tableforge/errors.hpp"
#include "tableforge/rng.hpp"
#include "tableforge/structure.hpp"
#include "tableforge/text.hpp"

namespace tableforge {

enum class SpanMode { none, header_only, row_only, column_only, row_and_column };

inline std::string_view to_string(SpanMode m) {
    switch (m) {
        case SpanMode::none: return "none";
        case SpanMode::header_only: return "header-only";
        case SpanMode::row_only: return "row-only";
        case SpanMode::column_only: return "column-only";
        default: return "row-and-column";
    }
}

inline SpanMode span_mode_from_string(std::string_view s) {
    if (s == "none") return SpanMode::none;
    if (s == "header-only") return SpanMode::header_only;
    if (s == "row-only") return SpanMode::row_only;
    if (s == "column-only") return SpanMode::column_only;
    if (s == "row-and-column") return SpanMode::row_and_column;
    throw Error("unknown span mode \"" + std::string(s) + "\"");
}

struct StructureParams {
    int n_rows = 4;
    int n_cols = 4;
    int n_header_rows = 1;
    SpanMode span_mode = SpanMode::none;
    int max_span = 2;
    double span_coverage = 0.0; // fraction of grid squares covered by spans

    void validate() const {
        if (n_rows < 1 || n_cols < 1) throw InfeasibleParamsError("table must be at least 1x1");
        if (n_header_rows < 1 || n_header_rows >= n_rows)
            throw InfeasibleParamsError("need 1 <= header rows < total rows");
        if (max_span < 2 || max_span > kMaxSpan)
            throw InfeasibleParamsError("max_span outside [2, 20]");
        if (span_coverage < 0.0 || span_coverage > 1.0)
            throw InfeasibleParamsError("span_coverage outside [0, 1]");
    }
};

// ---------------------------------------------------------------------------
// Structure generation

namespace detail {

struct SpanPlan {
    int row, col, rowspan, colspan;
};

} // namespace detail

/// Generates a strict grid honoring the span mode and the header/body
/// boundary. Spans are placed until the covered area is within one grid
/// square of round(span_coverage * area); impossible targets raise
/// InfeasibleParamsError. Deterministic in the seed.
inline TableGrid gen_structure(const StructureParams& params, std::uint64_t seed) {
    params.validate();
    Rng rng(seed);

    const int rows = params.n_rows;
    const int cols = params.n_cols;
    const int header = params.n_header_rows;
    std::vector<char> claimed(static_cast<std::size_t>(rows) * cols, 0);
    auto taken = [&](int r, int c) { return claimed[static_cast<std::size_t>(r) * cols + c]; };
    auto claim = [&](int r, int c) { claimed[static_cast<std::size_t>(r) * cols + c] = 1; };

    long remaining = std::lround(params.span_coverage * rows * cols);
    std::vector<detail::SpanPlan> spans;

    const int kAttempts = 400;
    int attempts = 0;
    while (remaining >= 2) {
        if (params.span_mode == SpanMode::none)
            throw InfeasibleParamsError("span coverage requested with span_mode none");
        if (++attempts > kAttempts)
            throw InfeasibleParamsError("could not reach span coverage after " +
                                        std::to_string(kAttempts) + " placements");

        bool vertical;
        bool planar = false;
        switch (params.span_mode) {
            case SpanMode::row_only: vertical = true; break;
            case SpanMode::column_only: vertical = false; break;
            case SpanMode::header_only:
                vertical = header >= 2 && rng.chance(0.3);
                break;
            default: { // row_and_column
                const double pick = rng.uniform();
                vertical = pick < 0.45;
                planar = pick >= 0.9;
                break;
            }
        }

        int rowspan = 1, colspan = 1;
        if (planar) {
            rowspan = static_cast<int>(rng.uniform_int(2, params.max_span));
            colspan = static_cast<int>(rng.uniform_int(2, params.max_span));
            if (static_cast<long>(rowspan) * colspan > remaining) continue;
        } else if (vertical) {
            rowspan = static_cast<int>(rng.uniform_int(2, std::min<long>(params.max_span, remaining)));
        } else {
            colspan = static_cast<int>(rng.uniform_int(2, std::min<long>(params.max_span, remaining)));
        }

        // anchor region: spans never cross the header/body boundary
        const bool header_region =
            params.span_mode == SpanMode::header_only
                ? true
                : rng.chance(0.5 * static_cast<double>(header) / rows);
        const int region_top = header_region ? 0 : header;
        const int region_rows = header_region ? header : rows - header;
        if (rowspan > region_rows || colspan > cols) continue;

        const int r = region_top + static_cast<int>(rng.uniform_int(0, region_rows - rowspan));
        const int c = static_cast<int>(rng.uniform_int(0, cols - colspan));

        bool free = true;
        for (int rr = r; free && rr < r + rowspan; ++rr)
            for (int cc = c; free && cc < c + colspan; ++cc)
                if (taken(rr, cc)) free = false;
        if (!free) continue;

        for (int rr = r; rr < r + rowspan; ++rr)
            for (int cc = c; cc < c + colspan; ++cc) claim(rr, cc);
        spans.push_back({r, c, rowspan, colspan});
        remaining -= static_cast<long>(rowspan) * colspan;
        attempts = 0;
    }

    // assemble cells in document order
    TableGrid grid;
    grid.n_rows = rows;
    grid.n_cols = cols;
    grid.header_rows = header;
    grid.sections = true;
    grid.squares.assign(static_cast<std::size_t>(rows) * cols, -1);

    std::vector<std::vector<const detail::SpanPlan*>> anchored(
        static_cast<std::size_t>(rows) * cols);
    for (const auto& s : spans)
        anchored[static_cast<std::size_t>(s.row) * cols + s.col].push_back(&s);

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (grid.square(r, c) >= 0) continue;
            const auto cell_index = static_cast<std::int32_t>(grid.cells.size());
            const auto& here = anchored[static_cast<std::size_t>(r) * cols + c];
            int rowspan = 1, colspan = 1;
            if (!here.empty()) {
                rowspan = here.front()->rowspan;
                colspan = here.front()->colspan;
            } else if (taken(r, c)) {
                continue; // covered by a span anchored elsewhere
            }
            for (int rr = r; rr < r + rowspan; ++rr)
                for (int cc = c; cc < c + colspan; ++cc) grid.square(rr, cc) = cell_index;
            grid.cells.push_back({r, c, rowspan, colspan, r < header});
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Content generation

struct ContentTemplate {
    std::string name = "default";
    std::vector<std::string> pool;
    double random_ratio = 0.0;   // probability a token is random text
    double empty_fraction = 0.0; // body cells left without content

    void validate() const {
        if (pool.empty() && random_ratio < 1.0)
            throw Error("content template \"" + name + "\" needs a term pool");
        if (random_ratio < 0.0 || random_ratio > 1.0 || empty_fraction < 0.0 ||
            empty_fraction > 1.0)
            throw Error("content template ratios must be in [0, 1]");
    }
};

/// 1-4 tokens per cell, drawn from the term pool or generated as random
/// text per the template ratio. Header cells are always populated; the
/// configured fraction of body cells stays empty.
inline std::vector<std::vector<std::string>> gen_content(const TableGrid& grid,
                                                         const ContentTemplate& tmpl,
                                                         std::uint64_t seed) {
    tmpl.validate();
    Rng rng(seed);
    std::vector<std::vector<std::string>> out(grid.cells.size());
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        if (!grid.cells[i].header && rng.chance(tmpl.empty_fraction)) continue;
        const int n_tokens = static_cast<int>(rng.uniform_int(1, 4));
        for (int t = 0; t < n_tokens; ++t) {
            if (rng.chance(tmpl.random_ratio)) {
                const int len = static_cast<int>(rng.uniform_int(3, 10));
                std::string word;
                for (int k = 0; k < len; ++k)
                    word += static_cast<char>('a' + rng.uniform_int(0, 25));
                out[i].push_back(std::move(word));
            } else {
                out[i].push_back(tmpl.pool[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(tmpl.pool.size()) - 1))]);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Layout

struct StyleTemplate {
    std::string name = "plain";
    double font_size = 10.0;
    double padding = 4.0;
    double border_width = 1.0;
    std::string border_color = "#000000";
    std::string header_fill = "#e0e0e0";
    std::string body_fill = "#ffffff";
    bool stripe_rows = false;
    std::string stripe_fill = "#f2f2f2";
    std::string text_color = "#000000";
    std::string header_text_color = "#000000";

    void validate() const {
        if (padding < 0.0) throw Error("style padding must be >= 0");
        if (font_size <= 0.0) throw Error("style font size must be > 0");
    }
};

/// Monospace character advance of the layout model.
inline double char_width(const StyleTemplate& style) { return 0.6 * style.font_size; }

struct LayoutResult {
    GridGeometry geom;
    std::vector<CellBox> boxes; // one per cell, document order
    double page_width = 0.0;
    double page_height = 0.0;
};

/// Deterministic layout: column width is the widest requirement among the
/// column's cells (character count * character width + 2 * padding),
/// spanning cells spreading their requirement evenly across covered
/// columns; row height is font size + 2 * padding. Cell boxes are exactly
/// the band rectangles of their covered squares.
inline LayoutResult layout(const TableGrid& grid,
                           const std::vector<std::vector<std::string>>& content,
                           const StyleTemplate& style) {
    style.validate();
    if (content.size() != grid.cells.size())
        throw Error("layout: content count mismatch");

    const double cw = char_width(style);
    const double min_width = std::max(2.0 * style.padding, cw);
    std::vector<double> col_width(grid.n_cols, min_width);
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        const GridCell& cell = grid.cells[i];
        const std::string text = join_tokens(content[i]);
        const double need =
            static_cast<double>(utf8_codepoints(text).size()) * cw + 2.0 * style.padding;
        const double per_col = need / cell.colspan;
        for (int c = cell.col; c < cell.col + cell.colspan; ++c)
            col_width[c] = std::max(col_width[c], per_col);
    }
    const double row_height = style.font_size + 2.0 * style.padding;

    LayoutResult out;
    out.geom.col_bounds.resize(grid.n_cols + 1, 0.0);
    for (int c = 0; c < grid.n_cols; ++c)
        out.geom.col_bounds[c + 1] = out.geom.col_bounds[c] + col_width[c];
    out.geom.row_bounds.resize(grid.n_rows + 1, 0.0);
    for (int r = 0; r < grid.n_rows; ++r)
        out.geom.row_bounds[r + 1] = out.geom.row_bounds[r] + row_height;

    out.boxes.reserve(grid.cells.size());
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        const GridCell& cell = grid.cells[i];
        CellBox box = out.geom.band_box(cell.row, cell.col, cell.rowspan, cell.colspan);
        box.klass = content[i].empty() ? CellKlass::empty : CellKlass::content;
        out.boxes.push_back(box);
    }
    out.page_width = out.geom.col_bounds.back();
    out.page_height = out.geom.row_bounds.back();
    return out;
}

// ---------------------------------------------------------------------------
// SVG rendering

namespace detail {

inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace detail

/// Byte-deterministic SVG: one rect per cell, one text element per
/// non-empty cell. Header cells use the header fill, body rows alternate
/// fills when striping is on.
inline std::string render_svg(const TableGrid& grid, const GridGeometry& geom,
                              const std::vector<std::vector<std::string>>& content,
                              const StyleTemplate& style) {
    if (content.size() != grid.cells.size()) throw Error("render_svg: content count mismatch");
    const double w = geom.col_bounds.back();
    const double h = geom.row_bounds.back();
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      detail::fmt_num(w) + "\" height=\"" + detail::fmt_num(h) +
                      "\" viewBox=\"0 0 " + detail::fmt_num(w) + " " + detail::fmt_num(h) +
                      "\">\n";
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        const GridCell& cell = grid.cells[i];
        const CellBox box = geom.band_box(cell.row, cell.col, cell.rowspan, cell.colspan);
        std::string fill;
        if (cell.header) fill = style.header_fill;
        else if (style.stripe_rows && (cell.row - grid.header_rows) % 2 == 1)
            fill = style.stripe_fill;
        else fill = style.body_fill;
        svg += "<rect x=\"" + detail::fmt_num(box.x0) + "\" y=\"" + detail::fmt_num(box.y0) +
               "\" width=\"" + detail::fmt_num(box.width()) + "\" height=\"" +
               detail::fmt_num(box.height()) + "\" fill=\"" + fill + "\"";
        if (style.border_width > 0.0)
            svg += " stroke=\"" + style.border_color + "\" stroke-width=\"" +
                   detail::fmt_num(style.border_width) + "\"";
        svg += "/>\n";
    }
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        if (content[i].empty()) continue;
        const GridCell& cell = grid.cells[i];
        const CellBox box = geom.band_box(cell.row, cell.col, cell.rowspan, cell.colspan);
        svg += "<text x=\"" + detail::fmt_num(box.x0 + style.padding) + "\" y=\"" +
               detail::fmt_num(box.y0 + style.padding + 0.8 * style.font_size) +
               "\" font-family=\"monospace\" font-size=\"" + detail::fmt_num(style.font_size) +
               "\" fill=\"" + (cell.header ? style.header_text_color : style.text_color) +
               "\">" + escape_html(join_tokens(content[i])) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

// ---------------------------------------------------------------------------
// Dataset generation

struct ParamRanges {
    int min_rows = 3, max_rows = 14;
    int min_cols = 2, max_cols = 8;
    int min_header_rows = 1, max_header_rows = 2;
    std::vector<SpanMode> span_modes{SpanMode::none};
    int max_span = 3;
    double min_span_coverage = 0.0, max_span_coverage = 0.25;
};

struct DatasetSpec {
    std::string name = "synthetic";
    std::size_t size = 0;
    SplitRatios ratios;
    ParamRanges structure;
    std::vector<StyleTemplate> styles;
    ContentTemplate content;

    void validate() const {
        if (size == 0) throw Error("dataset spec: size must be positive");
        if (styles.empty()) throw Error("dataset spec: needs at least one style");
        const double sum = ratios.train + ratios.test + ratios.val;
        if (std::abs(sum - 1.0) > 1e-9) throw Error("dataset spec: split ratios must sum to 1");
        content.validate();
        for (const auto& s : styles) s.validate();
    }
};

struct GeneratedRecord {
    TableRecord record;
    std::string svg;
    std::string style_name;
    double span_coverage_target = 0.0;
    double span_coverage_achieved = 0.0;
};

struct GenManifest {
    std::string name;
    std::uint64_t master_seed = 0;
    std::size_t requested = 0;
    std::size_t generated = 0;
    std::size_t n_train = 0, n_test = 0, n_val = 0;
    std::vector<std::pair<std::size_t, std::string>> errors; // (index, reason)

    ordered_json to_json() const {
        ordered_json j;
        j["name"] = name;
        j["master_seed"] = master_seed;
        j["requested"] = requested;
        j["generated"] = generated;
        j["splits"] = {{"train", n_train}, {"test", n_test}, {"val", n_val}};
        ordered_json errs = ordered_json::array();
        for (const auto& [index, reason] : errors)
            errs.push_back({{"index", index}, {"reason", reason}});
        j["errors"] = std::move(errs);
        return j;
    }
};

/// Generates one record by index. Every draw comes from the record's own
/// seed, so any index can be regenerated in isolation.
inline GeneratedRecord gen_record(const DatasetSpec& spec, std::uint64_t master_seed,
                                  std::size_t index) {
    Rng rng(derive_seed(master_seed, index));
    const auto& pr = spec.structure;

    StructureParams params;
    params.n_rows = static_cast<int>(rng.uniform_int(pr.min_rows, pr.max_rows));
    params.n_cols = static_cast<int>(rng.uniform_int(pr.min_cols, pr.max_cols));
    params.n_header_rows = static_cast<int>(rng.uniform_int(
        pr.min_header_rows, std::min(pr.max_header_rows, params.n_rows - 1)));
    params.span_mode = pr.span_modes[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(pr.span_modes.size()) - 1))];
    params.max_span = pr.max_span;
    // header-only spans can cover at most the header's share of the table
    // area; sample inside the feasible range so presets never stall
    double cap = 1.0;
    if (params.span_mode == SpanMode::header_only)
        cap = 0.75 * static_cast<double>(params.n_header_rows) / params.n_rows;
    params.span_coverage =
        params.span_mode == SpanMode::none
            ? 0.0
            : rng.uniform(std::min(pr.min_span_coverage, cap),
                          std::min(pr.max_span_coverage, cap));

    const TableGrid grid = gen_structure(params, rng.next_u64());
    const auto& style = spec.styles[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(spec.styles.size()) - 1))];
    const auto content = gen_content(grid, spec.content, rng.next_u64());
    const LayoutResult laid = layout(grid, content, style);

    GeneratedRecord out;
    out.style_name = style.name;
    out.span_coverage_target = params.span_coverage;
    long covered = 0;
    for (const auto& cell : grid.cells)
        if (cell.rowspan > 1 || cell.colspan > 1)
            covered += static_cast<long>(cell.rowspan) * cell.colspan;
    out.span_coverage_achieved =
        static_cast<double>(covered) / (params.n_rows * params.n_cols);

    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "%08zu", index);
    out.record.id = spec.name + "_" + idbuf;
    out.record.image = "svg/" + out.record.id + ".svg";
    out.record.tags = grid_to_tokens(grid);
    out.record.cells.resize(grid.cells.size());
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        out.record.cells[i].tokens = content[i];
        out.record.cells[i].bbox = laid.boxes[i];
        out.record.cells[i].klass = laid.boxes[i].klass;
    }
    finalize_record(out.record);
    out.svg = render_svg(grid, laid.geom, content, style);
    return out;
}

/// Streams the whole dataset into `sink` with split assignments by index
/// range. Per-record failures (infeasible parameter draws, token budget
/// overruns on extreme specs) are recorded in the manifest and skip their
/// index.
inline GenManifest gen_dataset(const DatasetSpec& spec, std::uint64_t master_seed,
                               const std::function<void(GeneratedRecord&&)>& sink) {
    spec.validate();
    GenManifest manifest;
    manifest.name = spec.name;
    manifest.master_seed = master_seed;
    manifest.requested = spec.size;

    const auto n = spec.size;
    const auto n_train =
        static_cast<std::size_t>(static_cast<double>(n) * spec.ratios.train + 1e-9);
    const auto n_test =
        static_cast<std::size_t>(static_cast<double>(n) * spec.ratios.test + 1e-9);

    for (std::size_t i = 0; i < n; ++i) {
        GeneratedRecord rec;
        try {
            rec = gen_record(spec, master_seed, i);
        } catch (const Error& e) {
            manifest.errors.emplace_back(i, e.what());
            continue;
        }
        rec.record.split = i < n_train            ? Split::train
                           : i < n_train + n_test ? Split::test
                                                  : Split::val;
        ++manifest.generated;
        if (rec.record.split == Split::train) ++manifest.n_train;
        else if (rec.record.split == Split::test) ++manifest.n_test;
        else ++manifest.n_val;
        sink(std::move(rec));
    }
    return manifest;
}

// ---------------------------------------------------------------------------
// Flavor presets: four built-in dataset specs covering the appearance
// range of the public table corpora plus a high-contrast and a sparse set.

inline DatasetSpec flavor_spec(std::string_view flavor, std::size_t size) {
    DatasetSpec spec;
    spec.size = size;
    spec.name = std::string(flavor);

    static const std::vector<std::string> kScienceTerms = {
        "study",    "group",   "control", "baseline", "mean",     "median",  "range",
        "total",    "patients", "cases",  "value",    "p",        "ci",      "95%",
        "age",      "male",    "female",  "yes",      "no",       "n",       "rate",
        "score",    "level",   "grade",   "type",     "method",   "model",   "test",
        "analysis", "result",  "effect",  "risk",     "ratio",    "factor",  "sample",
        "dose",     "time",    "days",    "weeks",    "months"};
    static const std::vector<std::string> kFinanceTerms = {
        "revenue",  "income",   "assets",   "total",    "net",      "gross",   "equity",
        "shares",   "cash",     "debt",     "interest", "tax",      "expenses", "operating",
        "12,345",   "1,234",    "567",      "89.1",     "4.5%",     "(123)",   "$",
        "2019",     "2020",     "2021",     "q1",       "q2",       "q3",      "q4",
        "fiscal",   "year",     "quarter",  "million",  "billion",  "per",     "basic",
        "diluted",  "margin",   "growth",   "capital",  "balance"};
    static const std::vector<std::string> kGenericTerms = {
        "alpha", "beta",  "gamma", "delta", "item",  "name",  "code",  "unit",
        "count", "size",  "color", "state", "north", "south", "east",  "west",
        "high",  "low",   "open",  "close", "true",  "false", "max",   "min"};

    StyleTemplate plain;
    plain.name = "plain";
    plain.font_size = 10.0;
    plain.padding = 4.0;
    plain.border_width = 0.5;
    plain.border_color = "#444444";
    plain.header_fill = "#eeeeee";
    plain.body_fill = "#ffffff";

    if (flavor == "pubtabnet-like") {
        spec.structure = {3, 14, 2, 8, 1, 2,
                          {SpanMode::none, SpanMode::header_only, SpanMode::row_and_column},
                          3, 0.05, 0.25};
        StyleTemplate serifish = plain;
        serifish.name = "journal";
        serifish.border_width = 0.75;
        serifish.header_fill = "#ffffff";
        spec.styles = {plain, serifish};
        spec.content = {"science", kScienceTerms, 0.25, 0.06};
    } else if (flavor == "fintabnet-like") {
        spec.structure = {3, 16, 2, 6, 1, 2,
                          {SpanMode::none, SpanMode::header_only, SpanMode::column_only},
                          4, 0.05, 0.2};
        StyleTemplate fin = plain;
        fin.name = "financial";
        fin.border_width = 0.0;
        fin.header_fill = "#dce6f1";
        fin.stripe_rows = true;
        fin.stripe_fill = "#f4f7fb";
        spec.styles = {fin};
        spec.content = {"finance", kFinanceTerms, 0.15, 0.04};
    } else if (flavor == "high-contrast") {
        spec.structure = {3, 12, 2, 7, 1, 2,
                          {SpanMode::row_only, SpanMode::column_only, SpanMode::row_and_column},
                          4, 0.1, 0.35};
        StyleTemplate loud;
        loud.name = "contrast";
        loud.font_size = 11.0;
        loud.padding = 5.0;
        loud.border_width = 1.5;
        loud.border_color = "#1a1a2e";
        loud.header_fill = "#16213e";
        loud.header_text_color = "#ffffff";
        loud.body_fill = "#ffd460";
        loud.stripe_rows = true;
        loud.stripe_fill = "#f07b3f";
        spec.styles = {loud};
        spec.content = {"generic", kGenericTerms, 0.35, 0.05};
    } else if (flavor == "sparse") {
        spec.structure = {4, 14, 2, 8, 1, 1, {SpanMode::none}, 2, 0.0, 0.0};
        StyleTemplate airy = plain;
        airy.name = "airy";
        airy.padding = 6.0;
        airy.border_width = 0.25;
        spec.styles = {airy};
        spec.content = {"generic", kGenericTerms, 0.2, 0.55};
    } else {
        throw Error("unknown flavor \"" + std::string(flavor) +
                    "\" (expected pubtabnet-like, fintabnet-like, high-contrast, sparse)");
    }
    return spec;
}

inline const std::vector<std::string>& flavor_names() {
    static const std::vector<std::string> kNames = {"pubtabnet-like", "fintabnet-like",
                                                    "high-contrast", "sparse"};
    return kNames;
}

// ---------------------------------------------------------------------------
// Dataset spec <-> JSON (the --spec file format of the synth command)

inline ordered_json style_to_json(const StyleTemplate& s) {
    return ordered_json{{"name", s.name},
                        {"font_size", s.font_size},
                        {"padding", s.padding},
                        {"border_width", s.border_width},
                        {"border_color", s.border_color},
                        {"header_fill", s.header_fill},
                        {"body_fill", s.body_fill},
                        {"stripe_rows", s.stripe_rows},
                        {"stripe_fill", s.stripe_fill},
                        {"text_color", s.text_color},
                        {"header_text_color", s.header_text_color}};
}

inline StyleTemplate style_from_json(const ordered_json& j) {
    StyleTemplate s;
    s.name = j.value("name", s.name);
    s.font_size = j.value("font_size", s.font_size);
    s.padding = j.value("padding", s.padding);
    s.border_width = j.value("border_width", s.border_width);
    s.border_color = j.value("border_color", s.border_color);
    s.header_fill = j.value("header_fill", s.header_fill);
    s.body_fill = j.value("body_fill", s.body_fill);
    s.stripe_rows = j.value("stripe_rows", s.stripe_rows);
    s.stripe_fill = j.value("stripe_fill", s.stripe_fill);
    s.text_color = j.value("text_color", s.text_color);
    s.header_text_color = j.value("header_text_color", s.header_text_color);
    return s;
}

inline ordered_json spec_to_json(const DatasetSpec& spec) {
    ordered_json j;
    j["name"] = spec.name;
    j["size"] = spec.size;
    j["split_ratios"] = {spec.ratios.train, spec.ratios.test, spec.ratios.val};
    ordered_json modes = ordered_json::array();
    for (const auto m : spec.structure.span_modes) modes.push_back(std::string(to_string(m)));
    j["structure"] = {{"rows", {spec.structure.min_rows, spec.structure.max_rows}},
                      {"cols", {spec.structure.min_cols, spec.structure.max_cols}},
                      {"header_rows",
                       {spec.structure.min_header_rows, spec.structure.max_header_rows}},
                      {"span_modes", std::move(modes)},
                      {"max_span", spec.structure.max_span},
                      {"span_coverage",
                       {spec.structure.min_span_coverage, spec.structure.max_span_coverage}}};
    ordered_json styles = ordered_json::array();
    for (const auto& s : spec.styles) styles.push_back(style_to_json(s));
    j["styles"] = std::move(styles);
    j["content"] = {{"name", spec.content.name},
                    {"pool", spec.content.pool},
                    {"random_ratio", spec.content.random_ratio},
                    {"empty_fraction", spec.content.empty_fraction}};
    return j;
}

inline DatasetSpec spec_from_json(const ordered_json& j) {
    DatasetSpec spec;
    spec.name = j.value("name", spec.name);
    spec.size = j.at("size").get<std::size_t>();
    if (j.contains("split_ratios")) {
        const auto& r = j.at("split_ratios");
        spec.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    }
    if (j.contains("structure")) {
        const auto& s = j.at("structure");
        auto range = [&s](const char* key, int& lo, int& hi) {
            if (!s.contains(key)) return;
            lo = s.at(key).at(0).get<int>();
            hi = s.at(key).at(1).get<int>();
        };
        range("rows", spec.structure.min_rows, spec.structure.max_rows);
        range("cols", spec.structure.min_cols, spec.structure.max_cols);
        range("header_rows", spec.structure.min_header_rows, spec.structure.max_header_rows);
        if (s.contains("span_modes")) {
            spec.structure.span_modes.clear();
            for (const auto& m : s.at("span_modes"))
                spec.structure.span_modes.push_back(
                    span_mode_from_string(m.get<std::string>()));
        }
        spec.structure.max_span = s.value("max_span", spec.structure.max_span);
        if (s.contains("span_coverage")) {
            spec.structure.min_span_coverage = s.at("span_coverage").at(0).get<double>();
            spec.structure.max_span_coverage = s.at("span_coverage").at(1).get<double>();
        }
    }
    if (j.contains("styles"))
        for (const auto& s : j.at("styles")) spec.styles.push_back(style_from_json(s));
    if (j.contains("content")) {
        const auto& c = j.at("content");
        spec.content.name = c.value("name", spec.content.name);
        if (c.contains("pool"))
            spec.content.pool = c.at("pool").get<std::vector<std::string>>();
        spec.content.random_ratio = c.value("random_ratio", spec.content.random_ratio);
        spec.content.empty_fraction = c.value("empty_fraction", spec.content.empty_fraction);
    }
    return spec;
}

} // namespace tableforge
