#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tableforge/errors.hpp"
#include "tableforge/geometry.hpp"
#include "tableforge/rng.hpp"
#include "tableforge/structure.hpp"

namespace tableforge {

using ordered_json = nlohmann::ordered_json;

enum class Split { train, test, val };

inline std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::test: return "test";
        default: return "val";
    }
}

inline std::optional<Split> split_from_string(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    if (s == "val" || s == "validation") return Split::val;
    return std::nullopt;
}

/// One table cell of an annotated record: content tokens, optional box,
/// empty/content class.
struct RecordCell {
    std::vector<std::string> tokens;
    std::optional<CellBox> bbox;
    CellKlass klass = CellKlass::content;
};

/// One annotated table. `complexity` and `strict` are derived from the tag
/// sequence at load time.
struct TableRecord {
    std::string id;
    Split split = Split::train;
    std::optional<std::string> image;
    std::optional<std::string> source;
    TagSequence tags;
    std::vector<RecordCell> cells;
    Complexity complexity = Complexity::simple;
    bool strict = true;
};

// ---------------------------------------------------------------------------
// Canonical JSON form

inline ordered_json record_to_json(const TableRecord& r) {
    ordered_json j;
    j["id"] = r.id;
    j["split"] = std::string(to_string(r.split));
    j["image"] = r.image ? ordered_json(*r.image) : ordered_json(nullptr);
    j["structure"] = ordered_json{{"tokens", r.tags.to_strings()}};
    ordered_json cells = ordered_json::array();
    for (const auto& c : r.cells) {
        ordered_json jc;
        jc["tokens"] = c.tokens;
        if (c.bbox) jc["bbox"] = {c.bbox->x0, c.bbox->y0, c.bbox->x1, c.bbox->y1};
        else jc["bbox"] = nullptr;
        jc["class"] = std::string(to_string(c.klass));
        cells.push_back(std::move(jc));
    }
    j["cells"] = std::move(cells);
    if (r.source) j["source"] = *r.source;
    return j;
}

inline std::string record_to_line(const TableRecord& r) { return record_to_json(r).dump(); }

/// Validates cross-field invariants and derives complexity/strictness.
/// Throws on violation.
inline void finalize_record(TableRecord& r) {
    r.tags.validate();
    if (r.cells.size() != r.tags.n_cells())
        throw Error("record " + r.id + ": " + std::to_string(r.cells.size()) +
                    " cells for " + std::to_string(r.tags.n_cells()) + " td tokens");
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        const auto& c = r.cells[i];
        if (c.klass == CellKlass::empty && !c.tokens.empty())
            throw Error("record " + r.id + ": empty cell " + std::to_string(i) +
                        " carries content tokens");
        if (c.bbox && !c.bbox->valid())
            throw Error("record " + r.id + ": degenerate bbox on cell " + std::to_string(i));
    }
    const TableGrid grid = tokens_to_grid(r.tags);
    r.complexity = classify(grid);
    r.strict = is_strict(grid);
}

inline TableRecord record_from_json(const ordered_json& j) {
    TableRecord r;
    r.id = j.at("id").get<std::string>();
    const auto split = split_from_string(j.at("split").get<std::string>());
    if (!split) throw Error("unknown split \"" + j.at("split").get<std::string>() + "\"");
    r.split = *split;
    if (j.contains("image") && !j.at("image").is_null())
        r.image = j.at("image").get<std::string>();
    if (j.contains("source") && !j.at("source").is_null())
        r.source = j.at("source").get<std::string>();
    r.tags = TagSequence::from_strings(
        j.at("structure").at("tokens").get<std::vector<std::string>>());
    for (const auto& jc : j.at("cells")) {
        RecordCell c;
        c.tokens = jc.at("tokens").get<std::vector<std::string>>();
        if (jc.contains("bbox") && !jc.at("bbox").is_null()) {
            const auto& b = jc.at("bbox");
            if (!b.is_array() || b.size() != 4) throw Error("bbox must be [x0,y0,x1,y1]");
            c.bbox = CellBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                             b[3].get<double>()};
        }
        if (jc.contains("class")) {
            const auto k = jc.at("class").get<std::string>();
            if (k == "empty") c.klass = CellKlass::empty;
            else if (k == "content") c.klass = CellKlass::content;
            else throw Error("unknown cell class \"" + k + "\"");
        } else {
            c.klass = c.tokens.empty() ? CellKlass::empty : CellKlass::content;
        }
        if (c.bbox) c.bbox->klass = c.klass;
        r.cells.push_back(std::move(c));
    }
    finalize_record(r);
    return r;
}

// ---------------------------------------------------------------------------
// PubTabNet-style ingestion

/// Re-tokenizes annotation content: raw tokens (often per character) are
/// joined and split on single spaces, giving word-level opaque tokens.
inline std::vector<std::string> retokenize_content(const std::vector<std::string>& raw) {
    std::string joined;
    for (const auto& t : raw) joined += t;
    std::vector<std::string> out;
    std::string cur;
    for (char ch : joined) {
        if (ch == ' ') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline TableRecord record_from_pubtabnet_json(const ordered_json& j) {
    TableRecord r;
    if (j.contains("filename")) r.id = j.at("filename").get<std::string>();
    else if (j.contains("id")) r.id = j.at("id").get<std::string>();
    else throw Error("record without filename/id");
    r.image = r.id;
    if (j.contains("split")) {
        const auto split = split_from_string(j.at("split").get<std::string>());
        if (!split) throw Error("unknown split \"" + j.at("split").get<std::string>() + "\"");
        r.split = *split;
    }
    const auto& html = j.at("html");
    auto tokens = html.at("structure").at("tokens").get<std::vector<std::string>>();
    // annotation sequences start at <thead>; wrap them in the table pair
    if (tokens.empty() || tokens.front() != "<table>") {
        tokens.insert(tokens.begin(), "<table>");
        tokens.push_back("</table>");
    }
    r.tags = TagSequence::from_strings(tokens);
    for (const auto& jc : html.at("cells")) {
        RecordCell c;
        c.tokens = retokenize_content(jc.at("tokens").get<std::vector<std::string>>());
        if (jc.contains("bbox") && !jc.at("bbox").is_null()) {
            const auto& b = jc.at("bbox");
            c.bbox = CellBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                             b[3].get<double>()};
        }
        c.klass = c.tokens.empty() ? CellKlass::empty : CellKlass::content;
        if (c.bbox) c.bbox->klass = c.klass;
        r.cells.push_back(std::move(c));
    }
    finalize_record(r);
    return r;
}

// ---------------------------------------------------------------------------
// Streaming ingestion

enum class DatasetFormat { canonical_jsonl, pubtabnet_jsonl };

inline DatasetFormat format_from_string(std::string_view s) {
    if (s == "canonical" || s == "canonical-jsonl") return DatasetFormat::canonical_jsonl;
    if (s == "pubtabnet" || s == "pubtabnet-jsonl") return DatasetFormat::pubtabnet_jsonl;
    throw UnknownFormatError(std::string(s));
}

struct IngestFailure {
    std::size_t line = 0;
    std::string id;
    std::string reason;
};

struct IngestReport {
    std::size_t n_ok = 0;
    std::vector<IngestFailure> failures;
};

/// Streams records out of a JSONL file, invoking `sink` per valid record.
/// Per-record failures land in the report instead of aborting the run.
inline IngestReport for_each_record(const std::string& path, DatasetFormat format,
                                    const std::function<void(TableRecord&&)>& sink) {
    std::ifstream in(path);
    if (!in) throw IoError(path);
    IngestReport report;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::string id;
        try {
            const ordered_json j = ordered_json::parse(line);
            if (j.contains("id")) id = j.value("id", "");
            else if (j.contains("filename")) id = j.value("filename", "");
            TableRecord r = format == DatasetFormat::canonical_jsonl
                                ? record_from_json(j)
                                : record_from_pubtabnet_json(j);
            ++report.n_ok;
            sink(std::move(r));
        } catch (const std::exception& e) {
            report.failures.push_back({lineno, id, e.what()});
        }
    }
    return report;
}

inline std::vector<TableRecord> ingest(const std::string& path, DatasetFormat format,
                                       IngestReport* report = nullptr) {
    std::vector<TableRecord> records;
    IngestReport rep = for_each_record(
        path, format, [&records](TableRecord&& r) { records.push_back(std::move(r)); });
    if (report) *report = std::move(rep);
    return records;
}

// ---------------------------------------------------------------------------
// Size filter

struct SizeBounds {
    int min_rows = 1, min_cols = 1;
    int max_rows = 20, max_cols = 10;
};

/// Inclusive at both ends: a 20x10 table passes the default filter.
inline bool within_size(const TableRecord& r, const SizeBounds& bounds = {}) {
    const TableGrid grid = tokens_to_grid(r.tags);
    return grid.n_rows >= bounds.min_rows && grid.n_rows <= bounds.max_rows &&
           grid.n_cols >= bounds.min_cols && grid.n_cols <= bounds.max_cols;
}

inline std::vector<TableRecord> filter_size(std::vector<TableRecord> records,
                                            const SizeBounds& bounds = {}) {
    std::vector<TableRecord> out;
    out.reserve(records.size());
    for (auto& r : records)
        if (within_size(r, bounds)) out.push_back(std::move(r));
    return out;
}

// ---------------------------------------------------------------------------
// Statistics

struct DatasetStats {
    std::map<std::pair<int, int>, std::size_t> size_histogram; // (rows, cols) -> count
    std::map<std::string, std::size_t> simple_per_split;
    std::map<std::string, std::size_t> complex_per_split;
    std::size_t strict_simple = 0, strict_complex = 0;
    std::size_t nonstrict_simple = 0, nonstrict_complex = 0;
    std::size_t tables_missing_bbox_simple = 0, tables_missing_bbox_complex = 0;
    std::size_t missing_boxes_simple = 0, missing_boxes_complex = 0;
    std::size_t total = 0;

    void add(const TableRecord& r) {
        const TableGrid grid = tokens_to_grid(r.tags);
        ++total;
        ++size_histogram[{grid.n_rows, grid.n_cols}];
        const std::string split(to_string(r.split));
        const bool simple = r.complexity == Complexity::simple;
        if (simple) ++simple_per_split[split];
        else ++complex_per_split[split];
        if (r.strict) (simple ? strict_simple : strict_complex)++;
        else (simple ? nonstrict_simple : nonstrict_complex)++;
        std::size_t missing = 0;
        for (const auto& c : r.cells)
            if (!c.bbox) ++missing;
        if (missing > 0) (simple ? tables_missing_bbox_simple : tables_missing_bbox_complex)++;
        (simple ? missing_boxes_simple : missing_boxes_complex) += missing;
    }

    void merge(const DatasetStats& other) {
        for (const auto& [k, v] : other.size_histogram) size_histogram[k] += v;
        for (const auto& [k, v] : other.simple_per_split) simple_per_split[k] += v;
        for (const auto& [k, v] : other.complex_per_split) complex_per_split[k] += v;
        strict_simple += other.strict_simple;
        strict_complex += other.strict_complex;
        nonstrict_simple += other.nonstrict_simple;
        nonstrict_complex += other.nonstrict_complex;
        tables_missing_bbox_simple += other.tables_missing_bbox_simple;
        tables_missing_bbox_complex += other.tables_missing_bbox_complex;
        missing_boxes_simple += other.missing_boxes_simple;
        missing_boxes_complex += other.missing_boxes_complex;
        total += other.total;
    }

    ordered_json to_json() const {
        ordered_json hist = ordered_json::array();
        for (const auto& [key, count] : size_histogram)
            hist.push_back({{"rows", key.first}, {"cols", key.second}, {"count", count}});
        ordered_json j;
        j["total"] = total;
        j["size_histogram"] = std::move(hist);
        j["complexity_per_split"] = {{"simple", simple_per_split},
                                     {"complex", complex_per_split}};
        j["strictness"] = {{"simple", {{"strict", strict_simple}, {"non_strict", nonstrict_simple}}},
                           {"complex",
                            {{"strict", strict_complex}, {"non_strict", nonstrict_complex}}}};
        j["missing_bboxes"] = {
            {"simple",
             {{"tables", tables_missing_bbox_simple}, {"boxes", missing_boxes_simple}}},
            {"complex",
             {{"tables", tables_missing_bbox_complex}, {"boxes", missing_boxes_complex}}}};
        return j;
    }
};

inline DatasetStats stats(const std::vector<TableRecord>& records) {
    DatasetStats s;
    for (const auto& r : records) s.add(r);
    return s;
}

// ---------------------------------------------------------------------------
// Combining datasets

struct CombineReport {
    std::vector<std::string> collisions; // original colliding ids
};

struct SplitRatios {
    double train = 0.80, test = 0.10, val = 0.10;
};

/// Concatenates named streams. Ids appearing in more than one place are
/// source-prefixed on every occurrence (one report entry per original id);
/// with `resplit`, records are ordered by id hash and reassigned by index
/// range so the requested ratios hold exactly.
inline std::vector<TableRecord> combine(
    std::vector<std::pair<std::string, std::vector<TableRecord>>> streams,
    CombineReport* report = nullptr, const std::optional<SplitRatios>& resplit = {}) {
    std::map<std::string, std::size_t> count;
    for (const auto& [name, records] : streams)
        for (const auto& r : records) ++count[r.id];

    std::vector<TableRecord> out;
    CombineReport rep;
    std::map<std::string, std::size_t> logged;
    std::map<std::string, std::size_t> final_seen;
    for (auto& [name, records] : streams) {
        for (auto& r : records) {
            r.source = name;
            if (count[r.id] > 1) {
                if (++logged[r.id] == 1) rep.collisions.push_back(r.id);
                r.id = name + ":" + r.id;
            }
            // same id twice within one source still collides after prefixing
            const std::size_t n_prior = final_seen[r.id]++;
            if (n_prior > 0) r.id += "#" + std::to_string(n_prior + 1);
            out.push_back(std::move(r));
        }
    }
    if (resplit) {
        std::vector<std::size_t> order(out.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&out](std::size_t a, std::size_t b) {
            const auto ha = hash_bytes(out[a].id);
            const auto hb = hash_bytes(out[b].id);
            if (ha != hb) return ha < hb;
            return out[a].id < out[b].id;
        });
        const auto n = out.size();
        const auto n_train = static_cast<std::size_t>(
            static_cast<double>(n) * resplit->train + 1e-9);
        const auto n_test =
            static_cast<std::size_t>(static_cast<double>(n) * resplit->test + 1e-9);
        for (std::size_t rank = 0; rank < n; ++rank) {
            Split s = rank < n_train ? Split::train
                      : rank < n_train + n_test ? Split::test
                                                : Split::val;
            out[order[rank]].split = s;
        }
    }
    if (report) *report = std::move(rep);
    return out;
}

} // namespace tableforge
