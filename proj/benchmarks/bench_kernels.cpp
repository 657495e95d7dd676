#include <benchmark/benchmark.h>

#include "vsod/encoder.hpp"
#include "vsod/features.hpp"
#include "vsod/serialref.hpp"

namespace {

cv::Mat random_rgb(int w, int h, std::uint64_t seed) {
    vsod::Rng rng(seed);
    cv::Mat img(h, w, CV_8UC3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at<cv::Vec3b>(y, x) = {static_cast<uchar>(rng.below(256)),
                                       static_cast<uchar>(rng.below(256)),
                                       static_cast<uchar>(rng.below(256))};
    return img;
}

cv::Mat1f random_field(int w, int h, std::uint64_t seed, double amp) {
    vsod::Rng rng(seed);
    cv::Mat1f f(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) f(y, x) = static_cast<float>(rng.range(-amp, amp));
    return f;
}

constexpr int kW = 640, kH = 360;

void bm_to_lab_parallel(benchmark::State& state) {
    const cv::Mat img = random_rgb(kW, kH, 1);
    cv::Mat1f l, a, b;
    for (auto _ : state) {
        vsod::to_lab(img, l, a, b);
        benchmark::DoNotOptimize(l.data);
    }
}

void bm_to_lab_serial(benchmark::State& state) {
    const cv::Mat img = random_rgb(kW, kH, 1);
    cv::Mat1f l, a, b;
    for (auto _ : state) {
        vsod::serial::to_lab(img, l, a, b);
        benchmark::DoNotOptimize(l.data);
    }
}

void bm_to_hsv_parallel(benchmark::State& state) {
    const cv::Mat img = random_rgb(kW, kH, 2);
    cv::Mat1f h, s, v;
    for (auto _ : state) {
        vsod::to_hsv(img, h, s, v);
        benchmark::DoNotOptimize(h.data);
    }
}

void bm_to_hsv_serial(benchmark::State& state) {
    const cv::Mat img = random_rgb(kW, kH, 2);
    cv::Mat1f h, s, v;
    for (auto _ : state) {
        vsod::serial::to_hsv(img, h, s, v);
        benchmark::DoNotOptimize(h.data);
    }
}

void bm_hs_average_parallel(benchmark::State& state) {
    const cv::Mat1f f = random_field(kW, kH, 3, 4.0);
    cv::Mat1f out;
    for (auto _ : state) {
        vsod::hs_average(f, out);
        benchmark::DoNotOptimize(out.data);
    }
}

void bm_hs_average_serial(benchmark::State& state) {
    const cv::Mat1f f = random_field(kW, kH, 3, 4.0);
    cv::Mat1f out;
    for (auto _ : state) {
        vsod::serial::hs_average(f, out);
        benchmark::DoNotOptimize(out.data);
    }
}

void bm_warp_parallel(benchmark::State& state) {
    const cv::Mat1f img = random_field(kW, kH, 4, 128.0);
    const cv::Mat1f u = random_field(kW, kH, 5, 3.0);
    const cv::Mat1f v = random_field(kW, kH, 6, 3.0);
    for (auto _ : state) {
        cv::Mat1f w = vsod::warp_bilinear(img, u, v);
        benchmark::DoNotOptimize(w.data);
    }
}

void bm_warp_serial(benchmark::State& state) {
    const cv::Mat1f img = random_field(kW, kH, 4, 128.0);
    const cv::Mat1f u = random_field(kW, kH, 5, 3.0);
    const cv::Mat1f v = random_field(kW, kH, 6, 3.0);
    for (auto _ : state) {
        cv::Mat1f w = vsod::serial::warp_bilinear(img, u, v);
        benchmark::DoNotOptimize(w.data);
    }
}

BENCHMARK(bm_to_lab_parallel);
BENCHMARK(bm_to_lab_serial);
BENCHMARK(bm_to_hsv_parallel);
BENCHMARK(bm_to_hsv_serial);
BENCHMARK(bm_hs_average_parallel);
BENCHMARK(bm_hs_average_serial);
BENCHMARK(bm_warp_parallel);
BENCHMARK(bm_warp_serial);

}  // namespace

BENCHMARK_MAIN();
