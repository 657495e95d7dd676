#include "vsod/slic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vsod {

namespace {

struct Center {
    float l, a, b, x, y;
};

// Scan-order flood fill of equal-label regions, 4-connected.
cv::Mat1i component_map(const cv::Mat1i& labels, std::vector<int>& areas,
                        std::vector<cv::Point>& firsts) {
    const int w = labels.cols, h = labels.rows;
    cv::Mat1i comp(labels.size(), -1);
    std::vector<cv::Point> stack;

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (comp(y, x) >= 0) continue;
            const int id = static_cast<int>(areas.size());
            const int lab = labels(y, x);
            areas.push_back(0);
            firsts.emplace_back(x, y);
            stack.push_back({x, y});
            comp(y, x) = id;
            while (!stack.empty()) {
                const cv::Point p = stack.back();
                stack.pop_back();
                ++areas[id];
                const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int nx = p.x + dx[k], ny = p.y + dy[k];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    if (comp(ny, nx) >= 0 || labels(ny, nx) != lab) continue;
                    comp(ny, nx) = id;
                    stack.push_back({nx, ny});
                }
            }
        }
    return comp;
}

}  // namespace

SuperpixelSegmentation slic_segment(const std::array<cv::Mat1f, kChannelCount>& channels,
                                    const SlicParams& params) {
    const cv::Mat1f& lch = channels[kChL];
    const cv::Mat1f& ach = channels[kChA];
    const cv::Mat1f& bch = channels[kChBb];
    const int w = lch.cols, h = lch.rows;

    if (params.n_target < 2)
        throw ConfigError("superpixel target must be at least 2");
    if (params.n_target > w * h)
        throw ConfigError("superpixel target exceeds pixel count");

    // Work in a 0..100 feature range so the classic compactness scale applies.
    cv::Mat1f L = lch * 100.0f, A = ach * 100.0f, B = bch * 100.0f;

    const float S = std::sqrt(static_cast<float>(w) * h / params.n_target);
    const int nx = std::max(1, static_cast<int>(std::lround(w / S)));
    const int ny = std::max(1, static_cast<int>(std::lround(h / S)));

    auto grad = [&](int x, int y) {
        const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
        const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
        auto sq = [](float v) { return v * v; };
        return sq(L(y, xp) - L(y, xm)) + sq(A(y, xp) - A(y, xm)) + sq(B(y, xp) - B(y, xm)) +
               sq(L(yp, x) - L(ym, x)) + sq(A(yp, x) - A(ym, x)) + sq(B(yp, x) - B(ym, x));
    };

    std::vector<Center> centers;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int cx = std::clamp(static_cast<int>((i + 0.5f) * w / nx), 0, w - 1);
            int cy = std::clamp(static_cast<int>((j + 0.5f) * h / ny), 0, h - 1);
            float best = std::numeric_limits<float>::max();
            int bx = cx, by = cy;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int px = std::clamp(cx + dx, 0, w - 1);
                    const int py = std::clamp(cy + dy, 0, h - 1);
                    const float g = grad(px, py);
                    if (g < best) {
                        best = g;
                        bx = px;
                        by = py;
                    }
                }
            centers.push_back({L(by, bx), A(by, bx), B(by, bx),
                               static_cast<float>(bx), static_cast<float>(by)});
        }

    const int k = static_cast<int>(centers.size());
    const float spatial_w = static_cast<float>(params.compactness * params.compactness / (S * S));
    cv::Mat1i labels(h, w, 0);

    for (int iter = 0; iter < params.iterations; ++iter) {
        parallel_for(0, h, [&](int y) {
            for (int x = 0; x < w; ++x) {
                float best = std::numeric_limits<float>::max();
                int best_c = 0;
                for (int c = 0; c < k; ++c) {
                    const Center& ct = centers[c];
                    if (std::abs(ct.x - x) > 2 * S || std::abs(ct.y - y) > 2 * S) continue;
                    const float dl = L(y, x) - ct.l, da = A(y, x) - ct.a, db = B(y, x) - ct.b;
                    const float dx = x - ct.x, dy = y - ct.y;
                    const float d = dl * dl + da * da + db * db + spatial_w * (dx * dx + dy * dy);
                    if (d < best) {
                        best = d;
                        best_c = c;
                    }
                }
                labels(y, x) = best_c;
            }
        });

        std::vector<double> sl(k, 0), sa(k, 0), sb(k, 0), sx(k, 0), sy(k, 0);
        std::vector<int> cnt(k, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int c = labels(y, x);
                sl[c] += L(y, x);
                sa[c] += A(y, x);
                sb[c] += B(y, x);
                sx[c] += x;
                sy[c] += y;
                ++cnt[c];
            }
        for (int c = 0; c < k; ++c) {
            if (cnt[c] == 0) continue;
            centers[c] = {static_cast<float>(sl[c] / cnt[c]), static_cast<float>(sa[c] / cnt[c]),
                          static_cast<float>(sb[c] / cnt[c]), static_cast<float>(sx[c] / cnt[c]),
                          static_cast<float>(sy[c] / cnt[c])};
        }
    }

    // Enforce 4-connectivity: every connected region becomes its own
    // superpixel; fragments below the size floor are absorbed by the
    // region of the first-scanned outside neighbor.
    std::vector<int> areas;
    std::vector<cv::Point> firsts;
    cv::Mat1i comp = component_map(labels, areas, firsts);
    const int ncomp = static_cast<int>(areas.size());
    const int min_area = std::max(4, static_cast<int>(S * S / 16.0f));

    std::vector<int> target(ncomp);
    std::iota(target.begin(), target.end(), 0);
    for (int c = 0; c < ncomp; ++c) {
        if (areas[c] >= min_area) continue;
        const cv::Point p = firsts[c];
        int into = -1;
        if (p.y > 0)
            into = comp(p.y - 1, p.x);
        else if (p.x > 0)
            into = comp(p.y, p.x - 1);
        if (into >= 0) target[c] = target[into];  // earlier comp, already resolved
    }

    std::vector<int> final_id(ncomp, -1);
    SuperpixelSegmentation seg;
    seg.labels.create(h, w);
    int next = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int t = target[comp(y, x)];
            if (final_id[t] < 0) final_id[t] = next++;
            seg.labels(y, x) = final_id[t];
        }
    seg.n = next;

    std::vector<double> cx(seg.n, 0), cy(seg.n, 0);
    std::vector<int> cn(seg.n, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int c = seg.labels(y, x);
            cx[c] += x;
            cy[c] += y;
            ++cn[c];
        }
    seg.centroids.resize(seg.n);
    for (int c = 0; c < seg.n; ++c)
        seg.centroids[c] = {cx[c] / cn[c], cy[c] / cn[c]};
    return seg;
}

}  // namespace vsod
