#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "vsod/encoder.hpp"
#include "vsod/slic.hpp"

using namespace vsod;

namespace {

std::array<cv::Mat1f, kChannelCount> channels_of(const cv::Mat& rgb) {
    FrameSequence seq;
    seq.video_id = "t";
    seq.frames = {rgb, rgb.clone()};
    HornSchunckFlow est;
    const auto flow = compute_flow(seq, est);
    return compute_channels(seq, flow).frames[0];
}

// Smooth two-tone texture with mild noise. Pure per-pixel noise is a
// degenerate input for the clustering (color distance drowns the
// spatial term and connectivity enforcement merges the debris).
cv::Mat textured_rgb(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    cv::Mat img(h, w, CV_8UC3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double s =
                0.5 + 0.5 * std::sin(2 * CV_PI * 2.0 * x / w) * std::sin(2 * CV_PI * 1.5 * y / h);
            auto tone = [&](double a, double b) {
                const double v = a + (b - a) * s + rng.range(-10.0, 10.0);
                return static_cast<uchar>(std::clamp(v, 0.0, 255.0));
            };
            img.at<cv::Vec3b>(y, x) = {tone(40, 160), tone(90, 150), tone(140, 60)};
        }
    return img;
}

int component_count(const cv::Mat1i& labels, int label) {
    cv::Mat1b visited = cv::Mat1b::zeros(labels.size());
    int comps = 0;
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    for (int y = 0; y < labels.rows; ++y)
        for (int x = 0; x < labels.cols; ++x) {
            if (labels(y, x) != label || visited(y, x)) continue;
            ++comps;
            std::deque<cv::Point> queue{{x, y}};
            visited(y, x) = 1;
            while (!queue.empty()) {
                const cv::Point p = queue.front();
                queue.pop_front();
                for (int k = 0; k < 4; ++k) {
                    const int nx = p.x + dx[k], ny = p.y + dy[k];
                    if (nx < 0 || ny < 0 || nx >= labels.cols || ny >= labels.rows) continue;
                    if (visited(ny, nx) || labels(ny, nx) != label) continue;
                    visited(ny, nx) = 1;
                    queue.emplace_back(nx, ny);
                }
            }
        }
    return comps;
}

}  // namespace

TEST_CASE("segmentation produces contiguous 4-connected labels") {
    const auto ch = channels_of(textured_rgb(120, 90, 7));
    SlicParams params;
    params.n_target = 60;
    const SuperpixelSegmentation seg = slic_segment(ch, params);

    REQUIRE(seg.n >= 2);
    CHECK(seg.n >= params.n_target / 3);
    CHECK(seg.n <= params.n_target * 3);
    REQUIRE(static_cast<int>(seg.centroids.size()) == seg.n);

    std::vector<int> area(static_cast<std::size_t>(seg.n), 0);
    for (int y = 0; y < seg.labels.rows; ++y)
        for (int x = 0; x < seg.labels.cols; ++x) {
            REQUIRE(seg.labels(y, x) >= 0);
            REQUIRE(seg.labels(y, x) < seg.n);
            area[static_cast<std::size_t>(seg.labels(y, x))]++;
        }
    for (int l = 0; l < seg.n; ++l) {
        CHECK(area[static_cast<std::size_t>(l)] > 0);
        CHECK(component_count(seg.labels, l) == 1);
    }
}

TEST_CASE("centroids sit at the mean position of their pixels") {
    const auto ch = channels_of(textured_rgb(80, 60, 8));
    SlicParams params;
    params.n_target = 40;
    const SuperpixelSegmentation seg = slic_segment(ch, params);

    std::vector<double> sx(static_cast<std::size_t>(seg.n), 0.0);
    std::vector<double> sy(static_cast<std::size_t>(seg.n), 0.0);
    std::vector<int> cnt(static_cast<std::size_t>(seg.n), 0);
    for (int y = 0; y < seg.labels.rows; ++y)
        for (int x = 0; x < seg.labels.cols; ++x) {
            const auto l = static_cast<std::size_t>(seg.labels(y, x));
            sx[l] += x;
            sy[l] += y;
            cnt[l]++;
        }
    for (int l = 0; l < seg.n; ++l) {
        const auto i = static_cast<std::size_t>(l);
        CHECK(seg.centroids[i].x == doctest::Approx(sx[i] / cnt[i]).epsilon(1e-9));
        CHECK(seg.centroids[i].y == doctest::Approx(sy[i] / cnt[i]).epsilon(1e-9));
    }
}

TEST_CASE("segmentation is deterministic") {
    const auto ch = channels_of(textured_rgb(100, 70, 9));
    SlicParams params;
    params.n_target = 50;
    const SuperpixelSegmentation a = slic_segment(ch, params);
    const SuperpixelSegmentation b = slic_segment(ch, params);
    CHECK(a.n == b.n);
    CHECK(cv::norm(a.labels, b.labels, cv::NORM_INF) == 0.0);
}

TEST_CASE("a two-tone image splits along the tone boundary") {
    cv::Mat img(60, 80, CV_8UC3, cv::Scalar(40, 40, 200));
    img(cv::Rect(40, 0, 40, 60)).setTo(cv::Scalar(220, 220, 40));
    const auto ch = channels_of(img);
    SlicParams params;
    params.n_target = 24;
    const SuperpixelSegmentation seg = slic_segment(ch, params);
    // No superpixel straddles the vertical boundary at x = 40.
    for (int y = 0; y < seg.labels.rows; ++y) {
        std::set<int> left, right;
        for (int x = 0; x < seg.labels.cols; ++x)
            (x < 40 ? left : right).insert(seg.labels(y, x));
        for (int l : left) CHECK(right.count(l) == 0);
    }
}

TEST_CASE("invalid superpixel counts are rejected") {
    const auto ch = channels_of(textured_rgb(30, 20, 10));
    SlicParams params;
    params.n_target = 1;
    CHECK_THROWS_AS(slic_segment(ch, params), ConfigError);
    params.n_target = 30 * 20 + 1;
    CHECK_THROWS_AS(slic_segment(ch, params), ConfigError);
}
