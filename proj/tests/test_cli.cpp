// End-to-end checks through the installed binary. TABLEFORGE_CLI_PATH is
// injected by the build.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <catch2/catch_amalgamated.hpp>

#include "tableforge/dataset_io.hpp"
#include "tableforge/synthgen.hpp"

using namespace tableforge;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int exit_code = -1;
    std::string stdout_text;
};

struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() /
              ("tableforge_cli_" + std::to_string(::getpid()) + "_" +
               std::to_string(next()++));
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }
    static int& next() {
        static int n = 0;
        return n;
    }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

CliRun run_cli(const Workspace& ws, const std::string& args) {
    const std::string out_file = ws / ("stdout_" + std::to_string(Workspace::next()++));
    const std::string cmd = std::string(TABLEFORGE_CLI_PATH) + " " + args + " > " + out_file +
                            " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    CliRun run;
    run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    run.stdout_text = ss.str();
    return run;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("synth twice with the same seed produces identical trees") {
    Workspace ws;
    const auto a = run_cli(ws, "synth --flavor sparse --size 8 --out " + (ws / "a") +
                                   " --seed 11");
    const auto b = run_cli(ws, "synth --flavor sparse --size 8 --out " + (ws / "b") +
                                   " --seed 11");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    for (const char* name : {"train.jsonl", "test.jsonl", "val.jsonl", "manifest.json"})
        CHECK(read_file(ws / (std::string("a/") + name)) ==
              read_file(ws / (std::string("b/") + name)));
    // svg bytes too
    for (const auto& entry : fs::directory_iterator(ws / "a/svg")) {
        const auto other = fs::path(ws / "b/svg") / entry.path().filename();
        CHECK(read_file(entry.path().string()) == read_file(other.string()));
    }
    // a different seed changes the output
    const auto c = run_cli(ws, "synth --flavor sparse --size 8 --out " + (ws / "c") +
                                   " --seed 12");
    REQUIRE(c.exit_code == 0);
    CHECK(read_file(ws / "a/train.jsonl") != read_file(ws / "c/train.jsonl"));
}

TEST_CASE("teds of a file against itself is 1.0, exit 0") {
    Workspace ws;
    REQUIRE(run_cli(ws, "synth --flavor pubtabnet-like --size 6 --out " + (ws / "d") +
                            " --seed 5")
                .exit_code == 0);
    const auto run = run_cli(ws, "teds --gt " + (ws / "d/train.jsonl") + " --pred " +
                                     (ws / "d/train.jsonl"));
    REQUIRE(run.exit_code == 0);
    const auto j = ordered_json::parse(run.stdout_text);
    CHECK(j.at("mean").get<double>() == 1.0);
    CHECK(j.at("n").get<int>() >= 1);
    const auto structural = run_cli(ws, "teds --structure-only --gt " + (ws / "d/train.jsonl") +
                                            " --pred " + (ws / "d/train.jsonl"));
    REQUIRE(structural.exit_code == 0);
    CHECK(ordered_json::parse(structural.stdout_text).at("mean").get<double>() == 1.0);
}

TEST_CASE("synth accepts a dataset spec file") {
    Workspace ws;
    {
        DatasetSpec spec = flavor_spec("sparse", 5);
        spec.name = "custom";
        std::ofstream out(ws / "spec.json");
        out << spec_to_json(spec).dump(2) << "\n";
    }
    const auto run =
        run_cli(ws, "synth --spec " + (ws / "spec.json") + " --out " + (ws / "s") + " --seed 3");
    REQUIRE(run.exit_code == 0);
    std::size_t lines = 0;
    std::ifstream in(ws / "s/train.jsonl");
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) {
            ++lines;
            CHECK(record_from_json(ordered_json::parse(line)).id.substr(0, 6) == "custom");
        }
    CHECK(lines == 4); // floor(5 * 0.8)
    // the round-tripped spec in the manifest matches what was supplied
    const auto manifest = ordered_json::parse(read_file(ws / "s/manifest.json"));
    CHECK(manifest.at("spec").at("name") == "custom");
    CHECK(manifest.at("generated").get<int>() == 5);
}

TEST_CASE("complete-bboxes reports dropped non-strict records, exit 0") {
    Workspace ws;
    {
        TableRecord ragged;
        ragged.id = "ragged";
        ragged.tags = parse_html(
            "<table><tr><td>a</td></tr><tr><td>b</td><td>c</td></tr></table>");
        ragged.cells.resize(3);
        for (auto& c : ragged.cells) c.tokens = {"t"};
        finalize_record(ragged);
        std::ofstream out(ws / "in.jsonl");
        out << record_to_line(ragged) << "\n";
    }
    const auto run = run_cli(ws, "complete-bboxes --in " + (ws / "in.jsonl") + " --out " +
                                     (ws / "out.jsonl") + " --report " + (ws / "rep.json"));
    REQUIRE(run.exit_code == 0);
    const auto report = ordered_json::parse(read_file(ws / "rep.json"));
    CHECK(report.at("dropped_non_strict").at("simple").get<int>() == 1);
    CHECK(read_file(ws / "out.jsonl").empty());
}

TEST_CASE("usage errors exit with 2, missing files with 1") {
    Workspace ws;
    CHECK(run_cli(ws, "frobnicate").exit_code == 2);
    CHECK(run_cli(ws, "teds --gt only_one_side.jsonl").exit_code == 2);
    CHECK(run_cli(ws, "stats --in " + (ws / "missing.jsonl")).exit_code == 1);
}

TEST_CASE("losses selftest passes and emits per-check results") {
    Workspace ws;
    const auto run = run_cli(ws, "losses --selftest --samples 200");
    REQUIRE(run.exit_code == 0);
    const auto j = ordered_json::parse(run.stdout_text);
    CHECK(j.at("pass").get<bool>());
    CHECK(j.at("checks").size() == 5);
}

TEST_CASE("eval-detection scores perfect detections at 1.0") {
    Workspace ws;
    REQUIRE(run_cli(ws, "synth --flavor high-contrast --size 5 --out " + (ws / "e") +
                            " --seed 2")
                .exit_code == 0);
    // detections = ground truth boxes with score 1.0
    {
        std::ifstream in(ws / "e/train.jsonl");
        std::ofstream out(ws / "dets.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            const auto j = ordered_json::parse(line);
            ordered_json dets = ordered_json::array();
            for (const auto& c : j.at("cells")) {
                if (c.at("class") != "content") continue;
                dets.push_back({{"bbox", c.at("bbox")}, {"score", 1.0}, {"class", "content"}});
            }
            out << ordered_json{{"id", j.at("id")}, {"detections", dets}}.dump() << "\n";
        }
    }
    const auto run = run_cli(ws, "eval-detection --pred " + (ws / "dets.jsonl") + " --gt " +
                                     (ws / "e/train.jsonl"));
    REQUIRE(run.exit_code == 0);
    const auto j = ordered_json::parse(run.stdout_text);
    CHECK(j.at("map").get<double>() == 1.0);
}

TEST_CASE("convert filters size and reports counts") {
    Workspace ws;
    {
        std::ofstream out(ws / "mixed.jsonl");
        for (int rows : {2, 21}) {
            TableRecord r;
            r.id = "r" + std::to_string(rows);
            std::string html = "<table>";
            for (int i = 0; i < rows; ++i) html += "<tr><td>x</td></tr>";
            html += "</table>";
            r.tags = parse_html(html);
            r.cells.resize(rows);
            for (auto& c : r.cells) c.tokens = {"x"};
            finalize_record(r);
            out << record_to_line(r) << "\n";
        }
    }
    const auto run = run_cli(ws, "convert --in " + (ws / "mixed.jsonl") +
                                     " --format canonical --out " + (ws / "conv.jsonl") +
                                     " --filter-size");
    REQUIRE(run.exit_code == 0);
    const auto j = ordered_json::parse(run.stdout_text);
    CHECK(j.at("kept").get<int>() == 1);
    CHECK(j.at("dropped_by_size").get<int>() == 1);
}

TEST_CASE("build-pool extracts frequent terms") {
    Workspace ws;
    REQUIRE(run_cli(ws, "synth --flavor fintabnet-like --size 5 --out " + (ws / "p") +
                            " --seed 9")
                .exit_code == 0);
    const auto run = run_cli(ws, "build-pool --in " + (ws / "p/train.jsonl") +
                                     " --format canonical --top 10");
    REQUIRE(run.exit_code == 0);
    const auto j = ordered_json::parse(run.stdout_text);
    CHECK(j.at("pool").size() <= 10);
    CHECK(j.at("pool").size() > 0);
}

TEST_CASE("postprocess emits html identical to the source for exact predictions") {
    Workspace ws;
    REQUIRE(run_cli(ws, "synth --flavor pubtabnet-like --size 4 --out " + (ws / "q") +
                            " --seed 21")
                .exit_code == 0);
    // pdf cells straight from ground truth
    {
        std::ifstream in(ws / "q/train.jsonl");
        std::ofstream pdf(ws / "pdf.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            const auto j = ordered_json::parse(line);
            ordered_json cells = ordered_json::array();
            for (const auto& c : j.at("cells")) {
                if (c.at("class") != "content") continue;
                std::string content;
                for (const auto& t : c.at("tokens")) {
                    if (!content.empty()) content += ' ';
                    content += t.get<std::string>();
                }
                cells.push_back({{"bbox", c.at("bbox")}, {"content", content}});
            }
            pdf << ordered_json{{"id", j.at("id")}, {"cells", cells}}.dump() << "\n";
        }
    }
    const auto run = run_cli(ws, "postprocess --pred " + (ws / "q/train.jsonl") +
                                     " --pdfcells " + (ws / "pdf.jsonl") + " --out " +
                                     (ws / "matched.jsonl"));
    REQUIRE(run.exit_code == 0);
    // scoring the emitted html against the ground truth gives 1.0
    const auto teds_run = run_cli(ws, "teds --gt " + (ws / "q/train.jsonl") + " --pred " +
                                          (ws / "matched.jsonl"));
    REQUIRE(teds_run.exit_code == 0);
    CHECK(ordered_json::parse(teds_run.stdout_text).at("mean").get<double>() == 1.0);
}

TEST_CASE("TABLEFORGE_THREADS does not change results") {
    Workspace ws;
    REQUIRE(run_cli(ws, "synth --flavor sparse --size 6 --out " + (ws / "t") + " --seed 4")
                .exit_code == 0);
    const std::string args =
        "teds --gt " + (ws / "t/train.jsonl") + " --pred " + (ws / "t/train.jsonl");
    const auto one = run_cli(ws, args); // default thread budget
    ::setenv("TABLEFORGE_THREADS", "1", 1);
    const auto serial = run_cli(ws, args);
    ::unsetenv("TABLEFORGE_THREADS");
    CHECK(one.stdout_text == serial.stdout_text);
}
