#ifndef VSOD_POSTPROC_HPP
#define VSOD_POSTPROC_HPP

#include <utility>
#include <vector>

#include <opencv2/core.hpp>

#include "vsod/common.hpp"

namespace vsod {

struct PostprocParams {
    int temporal_width = 3;  // odd
    double temporal_sigma = 0.75;
    double sigmoid_slope = 10.0;
    double sigmoid_center = 0.5;
    double min_component_frac = 0.001;  // of frame area
};

/// Per-pixel Gaussian convolution along time with a sum-1 kernel; at
/// sequence edges the kernel is renormalized over the valid frames.
std::vector<cv::Mat1f> temporal_smooth(const std::vector<cv::Mat1f>& maps,
                                       const PostprocParams& params = {});

/// Logistic contrast stretch around the center, rescaled back to [0,1].
cv::Mat1f contrast_enhance(const cv::Mat1f& map, const PostprocParams& params = {});

/// Thresholds at the map mean (>= rule), drops 4-connected components
/// smaller than min_component_frac x frame area, and zeroes the map
/// outside the survivors. Returns (mask, cleaned map).
std::pair<cv::Mat1b, cv::Mat1f> binarize_and_clean(const cv::Mat1f& map,
                                                   const PostprocParams& params = {});

}  // namespace vsod

#endif
