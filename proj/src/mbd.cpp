#include "vsod/mbd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <opencv2/imgproc.hpp>

namespace vsod {

cv::Mat1f mbd_transform(const cv::Mat1f& img, const cv::Mat1b& seeds, int passes) {
    CV_Assert(img.size() == seeds.size());
    CV_Assert(cv::countNonZero(seeds) > 0);
    const int w = img.cols, h = img.rows;
    constexpr float kInf = std::numeric_limits<float>::infinity();

    cv::Mat1f dist(img.size()), lo(img.size()), hi(img.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            dist(y, x) = seeds(y, x) ? 0.0f : kInf;
            lo(y, x) = hi(y, x) = img(y, x);
        }

    auto relax = [&](int y, int x, int ny, int nx) {
        if (dist(ny, nx) == kInf) return;
        const float nlo = std::min(lo(ny, nx), img(y, x));
        const float nhi = std::max(hi(ny, nx), img(y, x));
        if (nhi - nlo < dist(y, x)) {
            dist(y, x) = nhi - nlo;
            lo(y, x) = nlo;
            hi(y, x) = nhi;
        }
    };

    for (int pass = 0; pass < passes; ++pass) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (y > 0) relax(y, x, y - 1, x);
                if (x > 0) relax(y, x, y, x - 1);
            }
        for (int y = h - 1; y >= 0; --y)
            for (int x = w - 1; x >= 0; --x) {
                if (y < h - 1) relax(y, x, y + 1, x);
                if (x < w - 1) relax(y, x, y, x + 1);
            }
    }
    return dist;
}

cv::Mat1b border_seeds(cv::Size size) {
    cv::Mat1b seeds = cv::Mat1b::zeros(size);
    seeds.row(0).setTo(255);
    seeds.row(size.height - 1).setTo(255);
    seeds.col(0).setTo(255);
    seeds.col(size.width - 1).setTo(255);
    return seeds;
}

namespace {

struct BandStats {
    float mean[3];
    float var[3];
};

template <typename Fn>
void for_band(cv::Size size, int band, int thickness, Fn&& fn) {
    const int w = size.width, h = size.height;
    switch (band) {
        case 0:  // top
            for (int y = 0; y < std::min(thickness, h); ++y)
                for (int x = 0; x < w; ++x) fn(y, x);
            break;
        case 1:  // bottom
            for (int y = std::max(h - thickness, 0); y < h; ++y)
                for (int x = 0; x < w; ++x) fn(y, x);
            break;
        case 2:  // left
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < std::min(thickness, w); ++x) fn(y, x);
            break;
        default:  // right
            for (int y = 0; y < h; ++y)
                for (int x = std::max(w - thickness, 0); x < w; ++x) fn(y, x);
    }
}

}  // namespace

cv::Mat1f backgroundness(const cv::Mat1f& l, const cv::Mat1f& a, const cv::Mat1f& b,
                         double band_frac) {
    const int w = l.cols, h = l.rows;
    const cv::Mat1f* ch[3] = {&l, &a, &b};

    BandStats stats[4];
    for (int k = 0; k < 4; ++k) {
        const int side = (k < 2) ? h : w;
        const int thickness = std::max(1, static_cast<int>(std::lround(band_frac * side)));
        double sum[3] = {0, 0, 0}, sum2[3] = {0, 0, 0};
        int count = 0;
        for_band(l.size(), k, thickness, [&](int y, int x) {
            ++count;
            for (int c = 0; c < 3; ++c) {
                const double v = (*ch[c])(y, x);
                sum[c] += v;
                sum2[c] += v * v;
            }
        });
        for (int c = 0; c < 3; ++c) {
            const double m = sum[c] / count;
            stats[k].mean[c] = static_cast<float>(m);
            stats[k].var[c] = static_cast<float>(std::max(sum2[c] / count - m * m, 1e-4));
        }
    }

    cv::Mat1f out(l.size());
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            float total = 0.0f, largest = 0.0f;
            for (int k = 0; k < 4; ++k) {
                float d2 = 0.0f;
                for (int c = 0; c < 3; ++c) {
                    const float diff = (*ch[c])(y, x) - stats[k].mean[c];
                    d2 += diff * diff / stats[k].var[c];
                }
                const float d = std::sqrt(d2);
                total += d;
                largest = std::max(largest, d);
            }
            out(y, x) = total - largest;
        }
    });
    return rescale_unit(out);
}

namespace {

template <bool Dilate>
cv::Mat1f reconstruct(const cv::Mat1f& marker, const cv::Mat1f& mask) {
    CV_Assert(marker.size() == mask.size());
    const int w = mask.cols, h = mask.rows;
    cv::Mat1f out = marker.clone();

    auto clip = [&](float v, int y, int x) {
        return Dilate ? std::min(v, mask(y, x)) : std::max(v, mask(y, x));
    };
    auto better = [](float a, float b) { return Dilate ? std::max(a, b) : std::min(a, b); };

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out(y, x) = clip(out(y, x), y, x);

    bool changed = true;
    int guard = 0;
    while (changed && guard++ < 4 * (w + h)) {
        changed = false;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                float v = out(y, x);
                if (y > 0) v = better(v, out(y - 1, x));
                if (x > 0) v = better(v, out(y, x - 1));
                v = clip(v, y, x);
                if (v != out(y, x)) {
                    out(y, x) = v;
                    changed = true;
                }
            }
        for (int y = h - 1; y >= 0; --y)
            for (int x = w - 1; x >= 0; --x) {
                float v = out(y, x);
                if (y < h - 1) v = better(v, out(y + 1, x));
                if (x < w - 1) v = better(v, out(y, x + 1));
                v = clip(v, y, x);
                if (v != out(y, x)) {
                    out(y, x) = v;
                    changed = true;
                }
            }
    }
    return out;
}

}  // namespace

cv::Mat1f reconstruct_dilate(const cv::Mat1f& marker, const cv::Mat1f& mask) {
    return reconstruct<true>(marker, mask);
}

cv::Mat1f reconstruct_erode(const cv::Mat1f& marker, const cv::Mat1f& mask) {
    return reconstruct<false>(marker, mask);
}

int smooth_radius(const cv::Mat1f& s, double gamma) {
    const double mean = cv::mean(s)[0];
    const int shorter = std::min(s.cols, s.rows);
    return static_cast<int>(std::lround(gamma * std::sqrt(std::max(mean, 0.0)) * shorter));
}

cv::Mat1f smooth_morph(const cv::Mat1f& s, double gamma) {
    const int r = smooth_radius(s, gamma);
    if (r <= 0) return s.clone();

    const cv::Mat se = cv::getStructuringElement(cv::MORPH_RECT, cv::Size(2 * r + 1, 2 * r + 1));
    cv::Mat1f eroded, opened, dilated;
    cv::erode(s, eroded, se);
    opened = reconstruct_dilate(eroded, s);
    cv::dilate(opened, dilated, se);
    return reconstruct_erode(dilated, opened);
}

PixelCue compute_pixel_cue(const std::array<cv::Mat1f, kChannelCount>& channels,
                           const PixelCueParams& params) {
    const cv::Size size = channels[kChL].size();
    const cv::Mat1b seeds = border_seeds(size);

    std::array<cv::Mat1f, kMbdChannels.size()> dists;
    parallel_for(0, static_cast<int>(kMbdChannels.size()), [&](int i) {
        dists[i] = mbd_transform(channels[kMbdChannels[i]], seeds, params.mbd_passes);
    });

    cv::Mat1f sum = cv::Mat1f::zeros(size);
    for (const auto& d : dists) sum += d;

    PixelCue cue;
    cue.mbd_sum = sum;

    const cv::Mat1f bg = backgroundness(channels[kChL], channels[kChA], channels[kChBb],
                                        params.border_band_frac);
    cv::Mat1f combined = rescale_unit(sum).mul(bg);
    cue.saliency = rescale_unit(smooth_morph(combined, params.smooth_gamma));
    return cue;
}

}  // namespace vsod
