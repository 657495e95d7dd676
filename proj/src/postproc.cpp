#include "vsod/postproc.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

namespace vsod {

std::vector<cv::Mat1f> temporal_smooth(const std::vector<cv::Mat1f>& maps,
                                       const PostprocParams& params) {
    const int n = static_cast<int>(maps.size());
    const int half = params.temporal_width / 2;

    std::vector<float> taps(params.temporal_width);
    for (int k = -half; k <= half; ++k)
        taps[k + half] = static_cast<float>(
            std::exp(-k * k / (2.0 * params.temporal_sigma * params.temporal_sigma)));

    std::vector<cv::Mat1f> out(n);
    for (int t = 0; t < n; ++t) {
        out[t].create(maps[t].size());
        parallel_for(0, maps[t].rows, [&](int y) {
            for (int x = 0; x < maps[t].cols; ++x) {
                float acc = 0.0f, wsum = 0.0f;
                for (int k = -half; k <= half; ++k) {
                    const int tt = t + k;
                    if (tt < 0 || tt >= n) continue;
                    acc += taps[k + half] * maps[tt](y, x);
                    wsum += taps[k + half];
                }
                out[t](y, x) = acc / wsum;
            }
        });
    }
    return out;
}

cv::Mat1f contrast_enhance(const cv::Mat1f& map, const PostprocParams& params) {
    const float b = static_cast<float>(params.sigmoid_slope);
    const float c = static_cast<float>(params.sigmoid_center);
    cv::Mat1f out(map.size());
    parallel_for(0, map.rows, [&](int y) {
        for (int x = 0; x < map.cols; ++x)
            out(y, x) = 1.0f / (1.0f + std::exp(-b * (map(y, x) - c)));
    });
    return rescale_unit(out);
}

std::pair<cv::Mat1b, cv::Mat1f> binarize_and_clean(const cv::Mat1f& map,
                                                   const PostprocParams& params) {
    const double tau = cv::mean(map)[0];
    cv::Mat1b mask(map.size());
    for (int y = 0; y < map.rows; ++y)
        for (int x = 0; x < map.cols; ++x) mask(y, x) = map(y, x) >= tau ? 255 : 0;

    cv::Mat1i cc;
    const int ncomp = cv::connectedComponents(mask, cc, 4, CV_32S);
    std::vector<int> area(ncomp, 0);
    for (int y = 0; y < map.rows; ++y)
        for (int x = 0; x < map.cols; ++x) ++area[cc(y, x)];

    const double cutoff = params.min_component_frac * map.rows * map.cols;
    cv::Mat1f cleaned = cv::Mat1f::zeros(map.size());
    for (int y = 0; y < map.rows; ++y)
        for (int x = 0; x < map.cols; ++x) {
            if (mask(y, x) && area[cc(y, x)] >= cutoff) {
                cleaned(y, x) = map(y, x);
            } else {
                mask(y, x) = 0;
            }
        }
    return {mask, cleaned};
}

}  // namespace vsod
