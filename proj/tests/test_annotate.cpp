#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "test_support.hpp"
#include "vsod/annotate.hpp"

using namespace vsod;

TEST_CASE("density raster matches the closed form for one fixation") {
    DensityParams params;
    FixationLog log;
    log.records.push_back({20.0, 10.0, 0.6, 0});
    const cv::Size size(60, 40);
    const cv::Mat1f d = density_raster(log, 0.5, size, params);

    const double sigma_s = params.sigma_s_frac * 60;
    const double temporal = std::exp(-0.1 * 0.1 / (2 * params.sigma_t * params.sigma_t));
    CHECK(d(10, 20) == doctest::Approx(temporal).epsilon(1e-5));
    const double off = temporal * std::exp(-25.0 / (2 * sigma_s * sigma_s));
    CHECK(d(10, 25) == doctest::Approx(off).epsilon(1e-5));
    CHECK(d(10, 15) == doctest::Approx(d(10, 25)).epsilon(1e-5));
}

TEST_CASE("fixations at or before the query time contribute nothing") {
    DensityParams params;
    FixationLog log;
    log.records.push_back({5.0, 5.0, 1.0, 0});
    const cv::Mat1f d = density_raster(log, 1.0, {20, 20}, params);
    CHECK(cv::countNonZero(d) == 0);
}

TEST_CASE("fixations past the temporal cutoff contribute nothing") {
    DensityParams params;
    FixationLog log;
    log.records.push_back({5.0, 5.0, 1.0 + 5.0 * params.sigma_t, 0});
    CHECK(cv::countNonZero(density_raster(log, 1.0, {20, 20}, params)) == 0);

    log.records[0].t = 1.0 + 3.9 * params.sigma_t;
    CHECK(density_raster(log, 1.0, {20, 20}, params)(5, 5) > 0.0f);
}

TEST_CASE("masked density matches the brute-force double sum") {
    DensityParams params;
    Rng rng(404);
    for (int it = 0; it < 20; ++it) {
        const auto c = testsupport::random_density_case(rng, params);
        const double got = fixation_density(c.mask, c.t, c.fixations, c.size, params);
        const double want = oracles::density_brute_force(c.mask, c.t, c.fixations, c.size, params);
        CHECK(std::abs(got - want) <= 1e-3 * std::max(want, 1e-12));
    }
}

TEST_CASE("empty mask is a data error") {
    const cv::Mat1b mask = cv::Mat1b::zeros(10, 10);
    CHECK_THROWS_AS(fixation_density(mask, 0.0, {}, {10, 10}, {}), DataError);
}

TEST_CASE("object scores average per-keyframe densities over presence") {
    ObjectMaskSet set;
    MaskKeyframe kf0, kf1;
    kf0.frame_index = 0;
    kf0.labels = cv::Mat1w::zeros(40, 60);
    kf0.labels(cv::Rect(10, 10, 8, 6)).setTo(1);
    kf0.labels(cv::Rect(40, 20, 10, 10)).setTo(2);
    kf1.frame_index = 15;
    kf1.labels = cv::Mat1w::zeros(40, 60);
    kf1.labels(cv::Rect(12, 12, 8, 6)).setTo(1);  // object 2 absent here
    set.keyframes = {kf0, kf1};

    FixationLog log;
    for (int i = 0; i < 6; ++i) log.records.push_back({13.0 + i % 3, 12.0, 0.07 + 0.05 * i, 0});
    for (int i = 0; i < 3; ++i) log.records.push_back({44.0, 24.0, 0.11 + 0.04 * i, 1});

    DensityParams params;
    const double fps = 30.0;
    const auto scores = score_objects(set, log, fps, {60, 40}, params);
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].label == 1);
    CHECK(scores[1].label == 2);
    REQUIRE(scores[0].per_keyframe.size() == 2);
    REQUIRE(scores[1].per_keyframe.size() == 1);

    auto masked = [&](const cv::Mat1w& labels, int label, double t) {
        cv::Mat1b mask(labels.size());
        for (int y = 0; y < labels.rows; ++y)
            for (int x = 0; x < labels.cols; ++x) mask(y, x) = labels(y, x) == label ? 255 : 0;
        return oracles::density_brute_force(mask, t, log, labels.size(), params);
    };
    const double d1a = masked(kf0.labels, 1, 0.0);
    const double d1b = masked(kf1.labels, 1, 0.5);
    const double d2 = masked(kf0.labels, 2, 0.0);
    CHECK(scores[0].video_score == doctest::Approx((d1a + d1b) / 2).epsilon(1e-3));
    CHECK(scores[1].video_score == doctest::Approx(d2).epsilon(1e-3));
}

TEST_CASE("selection keeps every label at or above the threshold, sorted") {
    DensityParams params;
    params.score_threshold = 50.0;
    std::vector<ObjectScore> scores(3);
    scores[0].label = 3;
    scores[0].video_score = 61.0;
    scores[1].label = 1;
    scores[1].video_score = 49.9;
    scores[2].label = 2;
    scores[2].video_score = 50.0;
    const auto sel = select_salient(scores, params);
    REQUIRE(sel.size() == 2);
    CHECK(sel[0] == 2);
    CHECK(sel[1] == 3);
}

TEST_CASE("selection falls back to the single best label") {
    DensityParams params;
    params.score_threshold = 50.0;
    std::vector<ObjectScore> scores(2);
    scores[0].label = 2;
    scores[0].video_score = 7.0;
    scores[1].label = 1;
    scores[1].video_score = 3.0;
    const auto sel = select_salient(scores, params);
    REQUIRE(sel.size() == 1);
    CHECK(sel[0] == 2);

    scores[1].video_score = 7.0;  // tie goes to the smaller label
    const auto tie = select_salient(scores, params);
    REQUIRE(tie.size() == 1);
    CHECK(tie[0] == 1);

    CHECK(select_salient({}, params).empty());
}

TEST_CASE("ground-truth emission unions labels and records discards") {
    ObjectMaskSet set;
    MaskKeyframe whole, missing, split;
    whole.frame_index = 0;
    whole.labels = cv::Mat1w::zeros(30, 40);
    whole.labels(cv::Rect(4, 4, 10, 8)).setTo(2);
    whole.labels(cv::Rect(20, 10, 6, 6)).setTo(1);
    missing.frame_index = 15;
    missing.labels = cv::Mat1w::zeros(30, 40);
    missing.labels(cv::Rect(20, 10, 6, 6)).setTo(1);
    split.frame_index = 30;
    split.labels = cv::Mat1w::zeros(30, 40);
    split.labels(cv::Rect(4, 4, 4, 8)).setTo(2);
    split.labels(cv::Rect(12, 4, 4, 8)).setTo(2);
    set.keyframes = {whole, missing, split};

    const auto out = emit_gt_masks(set, {2});
    REQUIRE(out.masks.size() == 1);
    CHECK(out.masks[0].frame_index == 0);
    CHECK(out.masks[0].labels(8, 8) == 1);
    CHECK(out.masks[0].labels(12, 22) == 0);

    REQUIRE(out.discards.size() == 2);
    CHECK(out.discards[0].frame_index == 15);
    CHECK(out.discards[0].reason == "background-only");
    CHECK(out.discards[1].frame_index == 30);
    CHECK(out.discards[1].reason == "split");
}

TEST_CASE("two selected labels may form separate components without a split") {
    ObjectMaskSet set;
    MaskKeyframe kf;
    kf.frame_index = 0;
    kf.labels = cv::Mat1w::zeros(20, 30);
    kf.labels(cv::Rect(2, 2, 5, 5)).setTo(1);
    kf.labels(cv::Rect(20, 10, 5, 5)).setTo(2);
    set.keyframes = {kf};
    const auto out = emit_gt_masks(set, {1, 2});
    REQUIRE(out.masks.size() == 1);
    CHECK(out.discards.empty());
    CHECK(out.masks[0].labels(4, 4) == 1);
    CHECK(out.masks[0].labels(12, 22) == 1);
}

TEST_CASE("average annotation map weighs videos equally") {
    const cv::Size size(8, 4);
    cv::Mat1b left = cv::Mat1b::zeros(size), full(size, 255);
    left(cv::Rect(0, 0, 4, 4)).setTo(255);
    const cv::Mat1f aam = average_annotation_map({{left}, {full}}, size);
    CHECK(aam(2, 1) == doctest::Approx(1.0));
    CHECK(aam(2, 6) == doctest::Approx(0.5));
}

TEST_CASE("dataset stats report component counts and area percentages") {
    cv::Mat1b two = cv::Mat1b::zeros(4, 10), one = cv::Mat1b::zeros(4, 10);
    two(cv::Rect(0, 0, 2, 2)).setTo(255);
    two(cv::Rect(5, 1, 2, 2)).setTo(255);
    one(cv::Rect(3, 1, 2, 2)).setTo(255);
    const auto stats = dataset_stats({{two}, {one}});
    CHECK(stats.keyframes == 2);
    CHECK(stats.obj_count_mean == doctest::Approx(1.5));
    CHECK(stats.obj_count_std == doctest::Approx(0.5));
    CHECK(stats.area_mean == doctest::Approx(15.0));
    CHECK(stats.area_std == doctest::Approx(5.0));
}
