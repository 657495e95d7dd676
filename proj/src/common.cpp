#include "vsod/common.hpp"

#include <omp.h>

#include <atomic>

namespace vsod {

namespace {
std::atomic<int> g_threads{0};
}

void set_num_threads(int n) {
    g_threads.store(n < 0 ? 0 : n);
    // Keep OpenCV single-threaded; parallelism happens in our kernels
    // and per-video workers, and a fixed layout keeps runs reproducible.
    cv::setNumThreads(1);
}

int num_threads() {
    int n = g_threads.load();
    return n > 0 ? n : omp_get_max_threads();
}

cv::Mat1f rescale_unit(const cv::Mat1f& m) {
    double lo, hi;
    cv::minMaxLoc(m, &lo, &hi);
    cv::Mat1f out(m.size());
    if (hi - lo <= 0.0) {
        out.setTo(0.0f);
        return out;
    }
    const float scale = static_cast<float>(1.0 / (hi - lo));
    const float off = static_cast<float>(lo);
    for (int y = 0; y < m.rows; ++y) {
        const float* src = m.ptr<float>(y);
        float* dst = out.ptr<float>(y);
        for (int x = 0; x < m.cols; ++x) dst[x] = (src[x] - off) * scale;
    }
    return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(bytes);
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[h & 0xF];
        h >>= 4;
    }
    return s;
}

}  // namespace vsod
