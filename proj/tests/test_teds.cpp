#include <cstdlib>

#include <catch2/catch_amalgamated.hpp>

#include "tableforge/teds.hpp"

#include "oracles.hpp"

using namespace tableforge;

namespace {

TreeNode td(std::string content, int rowspan = 1, int colspan = 1) {
    TreeNode n;
    n.label = "td";
    n.content = std::move(content);
    n.rowspan = rowspan;
    n.colspan = colspan;
    return n;
}

TreeNode tr(std::vector<TreeNode> cells) {
    TreeNode n;
    n.label = "tr";
    n.children = std::move(cells);
    return n;
}

TableTree table(std::vector<TreeNode> rows) {
    TableTree t;
    t.root.label = "table";
    t.root.children = std::move(rows);
    return t;
}

} // namespace

TEST_CASE("identical trees have distance 0 and teds 1") {
    const TableTree t = table({tr({td("a"), td("b")})});
    CHECK(tree_edit_distance(t, t) == 0.0);
    CHECK(teds(t, t) == 1.0);
}

TEST_CASE("one extra leaf costs one insertion") {
    const TableTree a = table({tr({td("")})});        // table, tr, td
    const TableTree b = table({tr({td(""), td("")})}); // table, tr, td, td
    CHECK(tree_edit_distance(a, b) == Catch::Approx(1.0));
    CHECK(teds(a, b) == Catch::Approx(1.0 - 1.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("worked teds values 0.75 and 0.8") {
    const TableTree three = table({tr({td("")})});
    const TableTree four = table({tr({td(""), td("")})});
    const TableTree five = table({tr({td(""), td(""), td("")})});
    CHECK(teds(three, four) == Catch::Approx(0.75).margin(1e-12));
    CHECK(teds(four, five) == Catch::Approx(0.8).margin(1e-12));
}

TEST_CASE("content relabel costs the normalized string distance") {
    const TableTree a = table({tr({td("a")})});
    const TableTree b = table({tr({td("b")})});
    CHECK(tree_edit_distance(a, b) == Catch::Approx(1.0)); // lev("a","b")/1
    const TableTree ab = table({tr({td("ab")})});
    CHECK(tree_edit_distance(a, ab) == Catch::Approx(0.5)); // lev("a","ab")/2
}

TEST_CASE("differing span attributes cost a full relabel") {
    const TableTree a = table({tr({td("x", 2, 1)})});
    const TableTree b = table({tr({td("x", 1, 1)})});
    CHECK(tree_edit_distance(a, b) == Catch::Approx(1.0));
    CHECK(tree_edit_distance(a, a) == 0.0);
}

TEST_CASE("structure_only ignores content but not attributes") {
    const TableTree a = table({tr({td("hello")})});
    const TableTree b = table({tr({td("world")})});
    CHECK(teds(a, b, true) == 1.0);
    const TableTree c = table({tr({td("hello", 1, 2)})});
    CHECK(teds(a, c, true) < 1.0);
}

TEST_CASE("teds is symmetric and bounded") {
    Rng rng(101);
    for (int trial = 0; trial < 60; ++trial) {
        const TableTree a{oracles::random_tree(rng, static_cast<int>(rng.uniform_int(1, 8)))};
        const TableTree b{oracles::random_tree(rng, static_cast<int>(rng.uniform_int(1, 8)))};
        const double ab = teds(a, b);
        const double ba = teds(b, a);
        CHECK(ab == Catch::Approx(ba).margin(1e-12));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
    }
}

TEST_CASE("zhang-shasha equals the tai-mapping oracle on small trees") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const TableTree a{oracles::random_tree(rng, static_cast<int>(rng.uniform_int(1, 6)))};
        const TableTree b{oracles::random_tree(rng, static_cast<int>(rng.uniform_int(1, 6)))};
        const double fast = tree_edit_distance(a, b);
        const double slow = oracles::tai_mapping_distance(a, b);
        REQUIRE(fast == Catch::Approx(slow).margin(1e-9));
    }
}

TEST_CASE("deleting a leaf strictly decreases teds against the original") {
    const TableTree full = table({tr({td("a"), td("b")}), tr({td("c"), td("d")})});
    TableTree clipped = full;
    clipped.root.children[1].children.pop_back();
    CHECK(teds(full, clipped) < 1.0);
}

TEST_CASE("structure_only score is invariant under content change") {
    const TagSequence tags = parse_html("<table><tr><td>a</td><td>b</td></tr></table>");
    const TableTree a = tree_from_tokens(tags, {"a", "b"});
    const TableTree b = tree_from_tokens(tags, {"zzz", ""});
    const TableTree gt = tree_from_tokens(tags, {"a", "x"});
    CHECK(teds(gt, a, true) == Catch::Approx(teds(gt, b, true)).margin(1e-15));
}

TEST_CASE("trees built from tokens mirror the token nesting") {
    const TagSequence tags = parse_html(
        "<table><thead><tr><td colspan=\"2\">h</td></tr></thead>"
        "<tbody><tr><td>a</td><td>b</td></tr></tbody></table>");
    const TableTree t = tree_from_tokens(tags, {"h", "a", "b"});
    CHECK(t.size() == 8); // table, thead, tr, td, tbody, tr, td, td
    REQUIRE(t.root.children.size() == 2);
    CHECK(t.root.children[0].label == "thead");
    CHECK(t.root.children[0].children[0].children[0].colspan == 2);
    CHECK(t.root.children[1].children[0].children[1].content == "b");
    CHECK(t.has_span());
}

TEST_CASE("tree from html matches tree from tokens") {
    const char* html = "<table><tr><td>a b</td><td rowspan=\"2\">c</td></tr>"
                       "<tr><td>d</td></tr></table>";
    const TableTree from_html = tree_from_html(html);
    const ParsedTable parsed = parse_html_with_content(html);
    const TableTree from_tokens = tree_from_tokens(parsed.tags, parsed.cell_text);
    CHECK(tree_edit_distance(from_html, from_tokens) == 0.0);
    CHECK(teds(from_html, from_tokens) == 1.0);
}

TEST_CASE("batch summary averages per complexity of the ground truth") {
    const TableTree simple_gt = table({tr({td("a")})});
    const TableTree simple_pred = table({tr({td("a"), td("b")})}); // teds 0.75
    const TableTree complex_gt = table({tr({td("a", 2, 1)})});
    std::vector<std::pair<const TableTree*, const TableTree*>> pairs = {
        {&simple_gt, &simple_gt},   // 1.0, simple
        {&simple_gt, &simple_pred}, // 0.75, simple
        {&complex_gt, &complex_gt}, // 1.0, complex
    };
    const TedsSummary summary = teds_batch(pairs);
    CHECK(summary.n == 3);
    CHECK(summary.mean == Catch::Approx((1.0 + 0.75 + 1.0) / 3.0));
    REQUIRE(summary.simple_mean.has_value());
    CHECK(*summary.simple_mean == Catch::Approx(0.875));
    REQUIRE(summary.complex_mean.has_value());
    CHECK(*summary.complex_mean == Catch::Approx(1.0));

    // a batch without complex pairs reports no complex mean
    pairs.pop_back();
    const TedsSummary no_complex = teds_batch(pairs);
    CHECK_FALSE(no_complex.complex_mean.has_value());
}

TEST_CASE("unicode content compares by codepoints") {
    const TableTree a = table({tr({td("caf\xc3\xa9")})}); // cafe with acute e
    const TableTree b = table({tr({td("cafe")})});
    // one substitution over four codepoints, not two byte edits over five
    CHECK(tree_edit_distance(a, b) == Catch::Approx(0.25));
    // compatibility normalization folds typographic variants
    const TableTree dash = table({tr({td("a\xe2\x80\x93int")})}); // en dash
    const TableTree ascii = table({tr({td("a-int")})});
    CHECK(teds(dash, ascii) < 1.0);
    CHECK(teds(dash, ascii, false, true) == 1.0);
}

TEST_CASE("batch result does not depend on the thread budget") {
    Rng rng(7777);
    std::vector<TableTree> gt, pred;
    for (int i = 0; i < 40; ++i) {
        gt.push_back(TableTree{oracles::random_tree(rng, 6)});
        pred.push_back(TableTree{oracles::random_tree(rng, 6)});
    }
    std::vector<std::pair<const TableTree*, const TableTree*>> pairs;
    for (int i = 0; i < 40; ++i) pairs.emplace_back(&gt[i], &pred[i]);
    ::setenv("TABLEFORGE_THREADS", "1", 1);
    const TedsSummary serial = teds_batch(pairs);
    ::setenv("TABLEFORGE_THREADS", "4", 1);
    const TedsSummary parallel = teds_batch(pairs);
    ::unsetenv("TABLEFORGE_THREADS");
    CHECK(serial.mean == parallel.mean);
    CHECK(serial.simple_mean == parallel.simple_mean);
    CHECK(serial.complex_mean == parallel.complex_mean);
}

TEST_CASE("single-node trees score against larger ones") {
    TableTree bare;
    bare.root.label = "table";
    const TableTree ok = table({tr({td("x")})});
    // two of three nodes must be inserted
    CHECK(teds(bare, ok) == Catch::Approx(1.0 - 2.0 / 3.0));
    CHECK(teds(bare, bare) == 1.0);
}
