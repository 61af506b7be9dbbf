#include <catch2/catch_amalgamated.hpp>

#include "tableforge/detection.hpp"
#include "tableforge/rng.hpp"

#include "oracles.hpp"

using namespace tableforge;

namespace {

CellBox box_at(double x, double y, double w = 10, double h = 10) {
    return CellBox{x, y, x + w, y + h};
}

Detection det(const CellBox& b, double score, CellKlass k = CellKlass::content) {
    return Detection{b, score, k};
}

} // namespace

TEST_CASE("perfect detections give ap 1") {
    std::vector<std::vector<CellBox>> gts{{box_at(0, 0), box_at(20, 0)}, {box_at(0, 20)}};
    std::vector<std::vector<Detection>> dets{
        {det(box_at(0, 0), 1.0), det(box_at(20, 0), 1.0)}, {det(box_at(0, 20), 1.0)}};
    CHECK(voc_map(dets, gts) == Catch::Approx(1.0));
}

TEST_CASE("no detections give ap 0") {
    std::vector<std::vector<CellBox>> gts{{box_at(0, 0)}};
    CHECK(voc_map({{}}, gts) == 0.0);
    CHECK(voc_map({}, {}) == 0.0);
}

TEST_CASE("one hit one miss over two ground truths gives ap 0.5") {
    // ranked: TP at recall 0.5 precision 1.0, then FP at precision 0.5
    std::vector<std::vector<CellBox>> gts{{box_at(0, 0), box_at(50, 50)}};
    std::vector<std::vector<Detection>> dets{
        {det(box_at(0, 0), 0.9), det(box_at(200, 200), 0.8)}};
    CHECK(voc_map(dets, gts) == Catch::Approx(0.5));
}

TEST_CASE("empty-class detections are excluded") {
    std::vector<std::vector<CellBox>> gts{{box_at(0, 0)}};
    std::vector<std::vector<Detection>> dets{
        {det(box_at(0, 0), 0.9, CellKlass::empty), det(box_at(0, 0), 0.5)}};
    CHECK(voc_map(dets, gts) == Catch::Approx(1.0)); // only the content one counts
}

TEST_CASE("each ground truth is matched at most once") {
    std::vector<std::vector<CellBox>> gts{{box_at(0, 0)}};
    std::vector<std::vector<Detection>> dets{
        {det(box_at(0, 0), 0.9), det(box_at(0.5, 0), 0.8)}};
    // second detection overlaps the same gt but it is already taken -> FP
    // pr points: (1.0, 1.0) then (1.0, 0.5); ap = 1.0
    CHECK(voc_map(dets, gts) == Catch::Approx(1.0));
    // reversed scores: the weaker localization wins the gt first
    std::vector<std::vector<Detection>> reversed{
        {det(box_at(0, 0), 0.8), det(box_at(0.5, 0), 0.9)}};
    CHECK(voc_map(reversed, gts) == Catch::Approx(1.0)); // shifted box still passes 0.5 iou
}

TEST_CASE("voc_map equals the threshold-sweep oracle on random instances") {
    Rng rng(314);
    for (int trial = 0; trial < 300; ++trial) {
        const int n_images = static_cast<int>(rng.uniform_int(1, 3));
        std::vector<std::vector<CellBox>> gts(n_images);
        std::vector<std::vector<Detection>> dets(n_images);
        int total_dets = 0;
        for (int img = 0; img < n_images && total_dets < 10; ++img) {
            const int n_gt = static_cast<int>(rng.uniform_int(0, 4));
            for (int g = 0; g < n_gt; ++g)
                gts[img].push_back(box_at(20.0 * g, 30.0 * img));
            const int n_det = static_cast<int>(rng.uniform_int(0, std::min<std::int64_t>(
                                                                      4, 10 - total_dets)));
            for (int d = 0; d < n_det; ++d) {
                ++total_dets;
                const bool on_target = rng.chance(0.6) && !gts[img].empty();
                CellBox b = on_target
                                ? gts[img][static_cast<std::size_t>(rng.uniform_int(
                                      0, static_cast<std::int64_t>(gts[img].size()) - 1))]
                                : box_at(rng.uniform(0, 100), rng.uniform(0, 100));
                if (on_target && rng.chance(0.5)) {
                    b.x0 += rng.uniform(0, 3);
                    b.y0 += rng.uniform(0, 3);
                }
                // quantized scores force ties across images
                const double score = 0.1 * static_cast<double>(rng.uniform_int(1, 9));
                dets[img].push_back(det(b, score));
            }
        }
        const double fast = voc_map(dets, gts);
        const double slow = oracles::threshold_sweep_ap(dets, gts, 0.5);
        REQUIRE(fast == Catch::Approx(slow).margin(1e-9));
    }
}
