// tableforge: table-structure toolkit CLI.
//
// Subcommands: teds, eval-detection, stats, convert, combine,
// complete-bboxes, postprocess, synth, build-pool, losses.
// All results go to stdout (or --out) as JSON/JSONL; diagnostics to stderr.
// Exit codes: 0 success, 1 validation failure, 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tableforge/bbox_complete.hpp"
#include "tableforge/dataset_io.hpp"
#include "tableforge/detection.hpp"
#include "tableforge/losses.hpp"
#include "tableforge/parallel.hpp"
#include "tableforge/postproc.hpp"
#include "tableforge/selftest.hpp"
#include "tableforge/structure.hpp"
#include "tableforge/synthgen.hpp"
#include "tableforge/teds.hpp"

namespace tf = tableforge;
using tf::ordered_json;

namespace {

void emit_json(const ordered_json& j, const std::string& out_path, bool pretty) {
    const std::string text = pretty ? j.dump(2) + "\n" : j.dump() + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw tf::IoError("cannot write " + out_path);
        out << text;
    }
}

std::vector<ordered_json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tf::IoError(path);
    std::vector<ordered_json> lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            lines.push_back(ordered_json::parse(line));
        } catch (const std::exception& e) {
            std::cerr << path << ":" << lineno << ": bad json: " << e.what() << "\n";
        }
    }
    return lines;
}

void report_failures(const tf::IngestReport& report, const std::string& path) {
    for (const auto& f : report.failures)
        std::cerr << path << ":" << f.line << ": " << (f.id.empty() ? "<no id>" : f.id)
                  << ": " << f.reason << "\n";
}

// ---------------------------------------------------------------------------
// teds

tf::TableTree tree_from_any(const ordered_json& j) {
    if (j.contains("html")) return tf::tree_from_html(j.at("html").get<std::string>());
    const tf::TableRecord r = tf::record_from_json(j);
    std::vector<std::string> contents;
    contents.reserve(r.cells.size());
    for (const auto& c : r.cells) contents.push_back(tf::join_tokens(c.tokens));
    return tf::tree_from_tokens(r.tags, contents);
}

int cmd_teds(const std::string& gt_path, const std::string& pred_path, bool structure_only,
             bool normalize_content, const std::string& out_path, bool pretty) {
    std::map<std::string, tf::TableTree> pred_trees;
    for (const auto& j : read_jsonl(pred_path)) {
        try {
            pred_trees.emplace(j.at("id").get<std::string>(), tree_from_any(j));
        } catch (const std::exception& e) {
            std::cerr << "pred " << j.value("id", "<no id>") << ": " << e.what() << "\n";
        }
    }

    std::vector<tf::TableTree> gt_trees, matched_preds;
    std::size_t unmatched = 0;
    for (const auto& j : read_jsonl(gt_path)) {
        std::string id = j.value("id", "");
        try {
            auto it = pred_trees.find(id);
            if (it == pred_trees.end()) {
                ++unmatched;
                continue;
            }
            gt_trees.push_back(tree_from_any(j));
            matched_preds.push_back(it->second);
        } catch (const std::exception& e) {
            std::cerr << "gt " << id << ": " << e.what() << "\n";
        }
    }
    if (unmatched > 0)
        std::cerr << unmatched << " ground-truth records had no prediction with the same id\n";
    if (gt_trees.empty()) {
        std::cerr << "no scoreable pairs\n";
        return 1;
    }

    std::vector<std::pair<const tf::TableTree*, const tf::TableTree*>> pairs;
    pairs.reserve(gt_trees.size());
    for (std::size_t i = 0; i < gt_trees.size(); ++i)
        pairs.emplace_back(&gt_trees[i], &matched_preds[i]);
    const tf::TedsSummary summary = tf::teds_batch(pairs, structure_only, normalize_content);

    ordered_json j;
    j["mean"] = summary.mean;
    j["simple_mean"] =
        summary.simple_mean ? ordered_json(*summary.simple_mean) : ordered_json(nullptr);
    j["complex_mean"] =
        summary.complex_mean ? ordered_json(*summary.complex_mean) : ordered_json(nullptr);
    j["n"] = summary.n;
    emit_json(j, out_path, pretty);
    return 0;
}

// ---------------------------------------------------------------------------
// eval-detection

int cmd_eval_detection(const std::string& pred_path, const std::string& gt_path, double iou,
                       const std::string& out_path, bool pretty) {
    tf::IngestReport report;
    const auto gt_records = tf::ingest(gt_path, tf::DatasetFormat::canonical_jsonl, &report);
    report_failures(report, gt_path);

    std::map<std::string, std::vector<tf::CellBox>> gt_boxes;
    for (const auto& r : gt_records) {
        auto& boxes = gt_boxes[r.id];
        for (const auto& c : r.cells)
            if (c.bbox && c.klass == tf::CellKlass::content) boxes.push_back(*c.bbox);
    }

    std::map<std::string, std::vector<tf::Detection>> det_map;
    for (const auto& j : read_jsonl(pred_path)) {
        const std::string id = j.value("id", "");
        auto& dets = det_map[id];
        for (const auto& d : j.at("detections")) {
            tf::Detection det;
            const auto& b = d.at("bbox");
            det.box = tf::CellBox{b.at(0).get<double>(), b.at(1).get<double>(),
                                  b.at(2).get<double>(), b.at(3).get<double>()};
            det.score = d.at("score").get<double>();
            det.klass = d.value("class", "content") == "empty" ? tf::CellKlass::empty
                                                               : tf::CellKlass::content;
            dets.push_back(det);
        }
    }

    // images are the union of both files, aligned by id
    std::vector<std::vector<tf::Detection>> detections;
    std::vector<std::vector<tf::CellBox>> gts;
    std::map<std::string, std::size_t> image_index;
    for (const auto& [id, boxes] : gt_boxes) {
        image_index[id] = gts.size();
        gts.push_back(boxes);
        detections.emplace_back();
    }
    for (const auto& [id, dets] : det_map) {
        auto it = image_index.find(id);
        if (it == image_index.end()) {
            gts.emplace_back();
            detections.push_back(dets);
        } else {
            detections[it->second] = dets;
        }
    }

    ordered_json j;
    j["map"] = tf::voc_map(detections, gts, iou);
    j["n_images"] = gts.size();
    emit_json(j, out_path, pretty);
    return 0;
}

// ---------------------------------------------------------------------------
// stats / convert / combine

int cmd_stats(const std::string& in_path, const std::string& format,
              const std::string& out_path, bool pretty) {
    tf::DatasetStats stats;
    const tf::IngestReport report = tf::for_each_record(
        in_path, tf::format_from_string(format),
        [&stats](tf::TableRecord&& r) { stats.add(r); });
    report_failures(report, in_path);
    ordered_json j = stats.to_json();
    j["validation_failures"] = report.failures.size();
    emit_json(j, out_path, pretty);
    return 0;
}

int cmd_convert(const std::string& in_path, const std::string& format,
                const std::string& out_path, bool filter, int min_rows, int min_cols,
                int max_rows, int max_cols, const std::string& report_path, bool pretty) {
    std::ofstream out(out_path);
    if (!out) throw tf::IoError("cannot write " + out_path);
    const tf::SizeBounds bounds{min_rows, min_cols, max_rows, max_cols};
    std::size_t kept = 0, dropped = 0;
    const tf::IngestReport report =
        tf::for_each_record(in_path, tf::format_from_string(format), [&](tf::TableRecord&& r) {
            if (filter && !tf::within_size(r, bounds)) {
                ++dropped;
                return;
            }
            ++kept;
            out << tf::record_to_line(r) << "\n";
        });
    report_failures(report, in_path);
    ordered_json j{{"kept", kept},
                   {"dropped_by_size", dropped},
                   {"validation_failures", report.failures.size()}};
    emit_json(j, report_path, pretty);
    return 0;
}

int cmd_combine(const std::vector<std::string>& inputs, const std::string& out_path,
                const std::string& resplit, const std::string& report_path, bool pretty) {
    std::vector<std::pair<std::string, std::vector<tf::TableRecord>>> streams;
    for (const auto& path : inputs) {
        tf::IngestReport report;
        auto records = tf::ingest(path, tf::DatasetFormat::canonical_jsonl, &report);
        report_failures(report, path);
        streams.emplace_back(std::filesystem::path(path).stem().string(), std::move(records));
    }
    std::optional<tf::SplitRatios> ratios;
    if (!resplit.empty()) {
        tf::SplitRatios r;
        if (std::sscanf(resplit.c_str(), "%lf,%lf,%lf", &r.train, &r.test, &r.val) != 3)
            throw tf::Error("--resplit expects train,test,val ratios");
        ratios = r;
    }
    tf::CombineReport report;
    const auto merged = tf::combine(std::move(streams), &report, ratios);
    std::ofstream out(out_path);
    if (!out) throw tf::IoError("cannot write " + out_path);
    for (const auto& r : merged) out << tf::record_to_line(r) << "\n";
    ordered_json j{{"records", merged.size()}, {"id_collisions", report.collisions}};
    emit_json(j, report_path, pretty);
    return 0;
}

// ---------------------------------------------------------------------------
// complete-bboxes

int cmd_complete(const std::string& in_path, const std::string& out_path,
                 const std::string& report_path, bool pretty) {
    tf::IngestReport ingest_report;
    auto records = tf::ingest(in_path, tf::DatasetFormat::canonical_jsonl, &ingest_report);
    report_failures(ingest_report, in_path);
    tf::CompletionReport report;
    const auto completed = tf::complete_dataset(std::move(records), &report);
    std::ofstream out(out_path);
    if (!out) throw tf::IoError("cannot write " + out_path);
    for (const auto& r : completed) out << tf::record_to_line(r) << "\n";
    ordered_json j = report.to_json();
    j["validation_failures"] = ingest_report.failures.size();
    emit_json(j, report_path, pretty);
    return 0;
}

// ---------------------------------------------------------------------------
// postprocess

int cmd_postprocess(const std::string& pred_path, const std::string& pdf_path,
                    const std::string& out_path, double threshold,
                    const std::string& audit_dir) {
    std::map<std::string, std::vector<tf::PdfCell>> pdf_map;
    for (const auto& j : read_jsonl(pdf_path)) {
        auto& cells = pdf_map[j.at("id").get<std::string>()];
        for (const auto& c : j.at("cells")) {
            const auto& b = c.at("bbox");
            cells.push_back({tf::CellBox{b.at(0).get<double>(), b.at(1).get<double>(),
                                         b.at(2).get<double>(), b.at(3).get<double>()},
                             c.value("content", "")});
        }
    }
    if (!audit_dir.empty()) std::filesystem::create_directories(audit_dir);

    std::ofstream out(out_path);
    if (!out) throw tf::IoError("cannot write " + out_path);
    std::size_t done = 0, failed = 0;
    for (const auto& j : read_jsonl(pred_path)) {
        const std::string id = j.value("id", "<no id>");
        try {
            const tf::TableRecord record = tf::record_from_json(j);
            tf::Prediction pred;
            pred.tags = record.tags;
            for (const auto& c : record.cells) {
                if (!c.bbox)
                    throw tf::Error("prediction cell without bbox (id " + record.id + ")");
                pred.boxes.push_back(*c.bbox);
            }
            auto it = pdf_map.find(record.id);
            const std::vector<tf::PdfCell> pdf =
                it == pdf_map.end() ? std::vector<tf::PdfCell>{} : it->second;
            const tf::MatchedTable matched = tf::postprocess(pred, pdf, threshold);

            tf::TableRecord result = matched.to_record(pdf, record.id);
            result.split = record.split;
            result.image = record.image;
            ordered_json out_json = tf::record_to_json(result);
            out_json["html"] = matched.to_html(pdf);
            ordered_json dropped = ordered_json::array();
            for (const auto& [p, col] : matched.dropped_pdf)
                dropped.push_back({{"pdf_index", p}, {"column", col}});
            out_json["dropped_pdf_cells"] = std::move(dropped);
            out << out_json.dump() << "\n";
            ++done;

            if (!audit_dir.empty()) {
                std::ofstream audit(std::filesystem::path(audit_dir) / (record.id + ".json"));
                audit << matched.audit.dump(2) << "\n";
            }
        } catch (const std::exception& e) {
            ++failed;
            std::cerr << id << ": " << e.what() << "\n";
        }
    }
    std::cerr << "postprocessed " << done << " tables, " << failed << " failed\n";
    return failed > 0 && done == 0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// synth

int cmd_synth(const std::string& spec_path, const std::string& flavor, std::size_t size,
              const std::string& out_dir, std::uint64_t seed, bool pretty) {
    tf::DatasetSpec spec;
    if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw tf::IoError(spec_path);
        spec = tf::spec_from_json(ordered_json::parse(in));
        if (size > 0) spec.size = size;
    } else if (!flavor.empty()) {
        if (size == 0) throw tf::Error("--flavor requires --size");
        spec = tf::flavor_spec(flavor, size);
    } else {
        throw tf::Error("synth needs --spec or --flavor");
    }

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir / "svg");
    std::ofstream train(dir / "train.jsonl"), test(dir / "test.jsonl"),
        val(dir / "val.jsonl");
    if (!train || !test || !val) throw tf::IoError("cannot write into " + out_dir);

    const tf::GenManifest manifest =
        tf::gen_dataset(spec, seed, [&](tf::GeneratedRecord&& rec) {
            std::ofstream& sink = rec.record.split == tf::Split::train ? train
                                  : rec.record.split == tf::Split::test ? test
                                                                        : val;
            sink << tf::record_to_line(rec.record) << "\n";
            std::ofstream svg(dir / "svg" / (rec.record.id + ".svg"));
            svg << rec.svg;
        });

    ordered_json j = manifest.to_json();
    j["spec"] = tf::spec_to_json(spec);
    {
        std::ofstream mf(dir / "manifest.json");
        mf << j.dump(2) << "\n";
    }
    for (const auto& [index, reason] : manifest.errors)
        std::cerr << "record " << index << ": " << reason << "\n";
    emit_json({{"generated", manifest.generated},
               {"requested", manifest.requested},
               {"out", out_dir}},
              "", pretty);
    return 0;
}

// ---------------------------------------------------------------------------
// build-pool

int cmd_build_pool(const std::string& in_path, const std::string& format,
                   const std::string& out_path, std::size_t top, bool pretty) {
    std::map<std::string, std::size_t> freq;
    const tf::IngestReport report = tf::for_each_record(
        in_path, tf::format_from_string(format), [&freq](tf::TableRecord&& r) {
            for (const auto& c : r.cells)
                for (const auto& token : c.tokens)
                    if (!token.empty() && token.find('<') == std::string::npos) ++freq[token];
        });
    report_failures(report, in_path);

    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > top) ranked.resize(top);

    ordered_json pool = ordered_json::array();
    for (const auto& [token, count] : ranked) pool.push_back(token);
    ordered_json j{{"name", std::filesystem::path(in_path).stem().string()},
                   {"pool", std::move(pool)},
                   {"random_ratio", 0.2},
                   {"empty_fraction", 0.0}};
    emit_json(j, out_path, pretty);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tableforge: table-structure datasets, metrics and post-processing"};
    app.require_subcommand(1);
    app.fallthrough();
    bool pretty = false;
    app.add_flag("--pretty", pretty, "indent JSON output");

    // teds
    auto* teds = app.add_subcommand("teds", "tree-edit-distance similarity of tables");
    std::string teds_gt, teds_pred, teds_out;
    bool structure_only = false, normalize_content = false;
    teds->add_option("--gt", teds_gt, "ground-truth JSONL")->required();
    teds->add_option("--pred", teds_pred, "prediction JSONL")->required();
    teds->add_flag("--structure-only", structure_only, "ignore cell content");
    teds->add_flag("--normalize-content", normalize_content,
                   "compatibility-normalize cell text before comparison");
    teds->add_option("--out", teds_out, "write the summary here instead of stdout");

    // eval-detection
    auto* evald = app.add_subcommand("eval-detection", "PASCAL VOC mAP for cell detection");
    std::string evald_pred, evald_gt, evald_out;
    double evald_iou = 0.5;
    evald->add_option("--pred", evald_pred, "detections JSONL")->required();
    evald->add_option("--gt", evald_gt, "ground-truth records JSONL")->required();
    evald->add_option("--iou", evald_iou, "IoU threshold (default 0.5)");
    evald->add_option("--out", evald_out, "write the result here instead of stdout");

    // stats
    auto* stats = app.add_subcommand("stats", "dataset statistics");
    std::string stats_in, stats_format = "canonical", stats_out;
    stats->add_option("--in", stats_in, "records JSONL")->required();
    stats->add_option("--format", stats_format, "canonical | pubtabnet");
    stats->add_option("--out", stats_out, "write the stats here instead of stdout");

    // convert
    auto* convert = app.add_subcommand("convert", "convert/filter into canonical JSONL");
    std::string conv_in, conv_format = "pubtabnet", conv_out, conv_report;
    bool conv_filter = false;
    int min_rows = 1, min_cols = 1, max_rows = 20, max_cols = 10;
    convert->add_option("--in", conv_in, "input JSONL")->required();
    convert->add_option("--format", conv_format, "pubtabnet | canonical");
    convert->add_option("--out", conv_out, "output JSONL")->required();
    convert->add_flag("--filter-size", conv_filter, "apply the size filter");
    convert->add_option("--min-rows", min_rows, "size filter lower bound (default 1)");
    convert->add_option("--min-cols", min_cols, "size filter lower bound (default 1)");
    convert->add_option("--max-rows", max_rows, "size filter upper bound (default 20)");
    convert->add_option("--max-cols", max_cols, "size filter upper bound (default 10)");
    convert->add_option("--report", conv_report, "write the report here instead of stdout");

    // combine
    auto* combine = app.add_subcommand("combine", "concatenate canonical datasets");
    std::vector<std::string> comb_in;
    std::string comb_out, comb_resplit, comb_report;
    combine->add_option("--in", comb_in, "input JSONL (repeatable)")->required();
    combine->add_option("--out", comb_out, "output JSONL")->required();
    combine->add_option("--resplit", comb_resplit, "deterministic re-split, e.g. 0.8,0.1,0.1");
    combine->add_option("--report", comb_report, "write the report here instead of stdout");

    // complete-bboxes
    auto* complete = app.add_subcommand("complete-bboxes",
                                        "generate missing cell boxes from neighbors");
    std::string compl_in, compl_out, compl_report;
    complete->add_option("--in", compl_in, "records JSONL")->required();
    complete->add_option("--out", compl_out, "completed records JSONL")->required();
    complete->add_option("--report", compl_report, "write the report here instead of stdout");

    // postprocess
    auto* post = app.add_subcommand("postprocess", "match predictions against PDF cells");
    std::string post_pred, post_pdf, post_out, post_audit;
    double post_iou = 0.5;
    post->add_option("--pred", post_pred, "prediction records JSONL")->required();
    post->add_option("--pdfcells", post_pdf, "PDF cells JSONL")->required();
    post->add_option("--out", post_out, "matched tables JSONL")->required();
    post->add_option("--iou-threshold", post_iou, "good/bad split threshold (default 0.5)");
    post->add_option("--audit", post_audit, "directory for per-table audit logs");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_spec, synth_flavor, synth_out;
    std::size_t synth_size = 0;
    std::uint64_t synth_seed = 20240101;
    synth->add_option("--spec", synth_spec, "dataset spec JSON");
    synth->add_option("--flavor", synth_flavor,
                      "pubtabnet-like | fintabnet-like | high-contrast | sparse");
    synth->add_option("--size", synth_size, "record count (overrides the spec)");
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--seed", synth_seed, "master seed (default 20240101)");

    // build-pool
    auto* pool = app.add_subcommand("build-pool", "harvest frequent content terms");
    std::string pool_in, pool_format = "pubtabnet", pool_out;
    std::size_t pool_top = 200;
    pool->add_option("--in", pool_in, "records JSONL")->required();
    pool->add_option("--format", pool_format, "pubtabnet | canonical");
    pool->add_option("--out", pool_out, "write the pool here instead of stdout");
    pool->add_option("--top", pool_top, "pool size (default 200)");

    // losses
    auto* losses = app.add_subcommand("losses", "loss function utilities");
    bool selftest = false;
    std::size_t selftest_samples = 1000;
    losses->add_flag("--selftest", selftest, "run the gradient verification suite");
    losses->add_option("--samples", selftest_samples, "samples per gradient check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (teds->parsed())
            return cmd_teds(teds_gt, teds_pred, structure_only, normalize_content, teds_out,
                            pretty);
        if (evald->parsed())
            return cmd_eval_detection(evald_pred, evald_gt, evald_iou, evald_out, pretty);
        if (stats->parsed()) return cmd_stats(stats_in, stats_format, stats_out, pretty);
        if (convert->parsed())
            return cmd_convert(conv_in, conv_format, conv_out, conv_filter, min_rows,
                               min_cols, max_rows, max_cols, conv_report, pretty);
        if (combine->parsed())
            return cmd_combine(comb_in, comb_out, comb_resplit, comb_report, pretty);
        if (complete->parsed()) return cmd_complete(compl_in, compl_out, compl_report, pretty);
        if (post->parsed())
            return cmd_postprocess(post_pred, post_pdf, post_out, post_iou, post_audit);
        if (synth->parsed())
            return cmd_synth(synth_spec, synth_flavor, synth_size, synth_out, synth_seed,
                             pretty);
        if (pool->parsed())
            return cmd_build_pool(pool_in, pool_format, pool_out, pool_top, pretty);
        if (losses->parsed()) {
            if (!selftest) throw tf::Error("losses requires --selftest");
            const tf::SelfTestReport report = tf::losses_selftest(selftest_samples);
            emit_json(report.to_json(), "", pretty);
            return report.pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
