#include <doctest.h>

#include <cstring>

#include "vsod/encoder.hpp"
#include "vsod/features.hpp"
#include "vsod/serialref.hpp"

using namespace vsod;

namespace {

cv::Mat random_rgb(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    cv::Mat img(h, w, CV_8UC3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at<cv::Vec3b>(y, x) = {static_cast<uchar>(rng.below(256)),
                                       static_cast<uchar>(rng.below(256)),
                                       static_cast<uchar>(rng.below(256))};
    return img;
}

cv::Mat1f random_field(int w, int h, std::uint64_t seed, double amp) {
    Rng rng(seed);
    cv::Mat1f f(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) f(y, x) = static_cast<float>(rng.range(-amp, amp));
    return f;
}

bool bit_identical(const cv::Mat1f& a, const cv::Mat1f& b) {
    if (a.size() != b.size()) return false;
    for (int y = 0; y < a.rows; ++y)
        if (std::memcmp(a.ptr(y), b.ptr(y), sizeof(float) * static_cast<std::size_t>(a.cols)))
            return false;
    return true;
}

}  // namespace

TEST_CASE("Lab conversion hits the sRGB reference points") {
    cv::Mat img(1, 3, CV_8UC3);
    img.at<cv::Vec3b>(0, 0) = {255, 0, 0};      // pure red
    img.at<cv::Vec3b>(0, 1) = {255, 255, 255};  // white
    img.at<cv::Vec3b>(0, 2) = {0, 0, 0};        // black
    cv::Mat1f l, a, b;
    to_lab(img, l, a, b);
    CHECK(l(0, 0) == doctest::Approx(53.24).epsilon(0.01));
    CHECK(a(0, 0) == doctest::Approx(80.09).epsilon(0.01));
    CHECK(b(0, 0) == doctest::Approx(67.20).epsilon(0.01));
    CHECK(l(0, 1) == doctest::Approx(100.0).epsilon(0.001));
    CHECK(a(0, 1) == doctest::Approx(0.0).scale(1).epsilon(0.01));
    CHECK(b(0, 1) == doctest::Approx(0.0).scale(1).epsilon(0.01));
    CHECK(l(0, 2) == doctest::Approx(0.0).scale(1).epsilon(0.001));
}

TEST_CASE("HSV conversion matches the hexcone model") {
    cv::Mat img(1, 3, CV_8UC3);
    img.at<cv::Vec3b>(0, 0) = {255, 0, 0};
    img.at<cv::Vec3b>(0, 1) = {0, 255, 0};
    img.at<cv::Vec3b>(0, 2) = {128, 128, 128};
    cv::Mat1f h, s, v;
    to_hsv(img, h, s, v);
    CHECK(h(0, 0) == doctest::Approx(0.0));
    CHECK(s(0, 0) == doctest::Approx(1.0));
    CHECK(v(0, 0) == doctest::Approx(1.0));
    CHECK(h(0, 1) == doctest::Approx(120.0));
    CHECK(s(0, 2) == doctest::Approx(0.0));
    CHECK(v(0, 2) == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("serial and parallel kernels are bit-identical") {
    const cv::Mat img = random_rgb(97, 53, 11);

    cv::Mat1f l1, a1, b1, l2, a2, b2;
    to_lab(img, l1, a1, b1);
    serial::to_lab(img, l2, a2, b2);
    CHECK(bit_identical(l1, l2));
    CHECK(bit_identical(a1, a2));
    CHECK(bit_identical(b1, b2));

    cv::Mat1f h1, s1, v1, h2, s2, v2;
    to_hsv(img, h1, s1, v1);
    serial::to_hsv(img, h2, s2, v2);
    CHECK(bit_identical(h1, h2));
    CHECK(bit_identical(s1, s2));
    CHECK(bit_identical(v1, v2));

    CHECK(bit_identical(to_gray(img), serial::to_gray(img)));

    const cv::Mat1f f = random_field(97, 53, 12, 4.0);
    cv::Mat1f avg1, avg2;
    hs_average(f, avg1);
    serial::hs_average(f, avg2);
    CHECK(bit_identical(avg1, avg2));

    const cv::Mat1f u = random_field(97, 53, 13, 2.5);
    const cv::Mat1f v = random_field(97, 53, 14, 2.5);
    CHECK(bit_identical(warp_bilinear(f, u, v), serial::warp_bilinear(f, u, v)));
}

TEST_CASE("flicker is the absolute rescaled-luminance difference") {
    cv::Mat1f prev(2, 2), cur(2, 2);
    prev << 0.1f, 0.5f, 0.9f, 0.2f;
    cur << 0.4f, 0.5f, 0.1f, 0.3f;
    const cv::Mat1f t = compute_flicker(cur, prev);
    CHECK(t(0, 0) == doctest::Approx(0.3));
    CHECK(t(0, 1) == doctest::Approx(0.0));
    CHECK(t(1, 0) == doctest::Approx(0.8));
    CHECK(t(1, 1) == doctest::Approx(0.1));
}

TEST_CASE("a static pair yields exactly zero flow") {
    const cv::Mat img = random_rgb(64, 48, 21);
    const cv::Mat1f g = to_gray(img);
    HornSchunckFlow flow;
    const FlowField f = flow.compute(g, g);
    CHECK(cv::norm(f.u, cv::NORM_INF) == 0.0);
    CHECK(cv::norm(f.v, cv::NORM_INF) == 0.0);
}

TEST_CASE("a horizontal shift produces rightward flow") {
    const int w = 96, h = 64;
    cv::Mat1f a(h, w), b(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            auto tex = [](double xx, double yy) {
                return 128.0 + 90.0 * std::sin(xx * 0.35) * std::cos(yy * 0.28);
            };
            a(y, x) = static_cast<float>(tex(x, y));
            b(y, x) = static_cast<float>(tex(x - 1.0, y));  // scene moved right
        }
    HornSchunckFlow flow;
    const FlowField f = flow.compute(a, b);
    cv::Scalar mu = cv::mean(f.u(cv::Rect(8, 8, w - 16, h - 16)));
    cv::Scalar mv = cv::mean(f.v(cv::Rect(8, 8, w - 16, h - 16)));
    CHECK(mu[0] > 0.4);
    CHECK(std::abs(mv[0]) < 0.2);
}

TEST_CASE("the last frame of a sequence gets a zero flow field") {
    FrameSequence seq;
    seq.video_id = "t";
    seq.frames = {random_rgb(32, 24, 31), random_rgb(32, 24, 32), random_rgb(32, 24, 33)};
    HornSchunckFlow est;
    const auto flow = compute_flow(seq, est);
    REQUIRE(flow.size() == 3);
    CHECK(cv::norm(flow[2].u, cv::NORM_INF) == 0.0);
    CHECK(cv::norm(flow[2].v, cv::NORM_INF) == 0.0);
}

TEST_CASE("all twelve channels live in the unit interval") {
    FrameSequence seq;
    seq.video_id = "t";
    for (int t = 0; t < 3; ++t) seq.frames.push_back(random_rgb(40, 30, 41 + t));
    HornSchunckFlow est;
    const auto flow = compute_flow(seq, est);
    const ChannelStack stack = compute_channels(seq, flow);
    REQUIRE(stack.frame_count() == 3);
    for (int t = 0; t < 3; ++t)
        for (int c = 0; c < kChannelCount; ++c) {
            double lo, hi;
            cv::minMaxLoc(stack.at(t, c), &lo, &hi);
            CHECK(lo >= 0.0);
            CHECK(hi <= 1.0 + 1e-6);
        }
    // No predecessor: the flicker channel of the first frame is empty.
    CHECK(cv::norm(stack.at(0, kChT), cv::NORM_INF) == 0.0);
}
