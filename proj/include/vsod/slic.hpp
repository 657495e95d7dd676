#ifndef VSOD_SLIC_HPP
#define VSOD_SLIC_HPP

#include <array>
#include <vector>

#include <opencv2/core.hpp>

#include "vsod/features.hpp"

namespace vsod {

struct SlicParams {
    int n_target = 300;
    double compactness = 10.0;
    int iterations = 10;
};

struct SuperpixelSegmentation {
    cv::Mat1i labels;  // values in [0, n), every region 4-connected
    int n = 0;
    std::vector<cv::Point2d> centroids;
};

/// k-means clustering in (L,a,b,x,y) with grid initialization and
/// 4-connectivity enforcement. Regions split by the enforcement keep
/// separate labels, so n may exceed n_target.
SuperpixelSegmentation slic_segment(const std::array<cv::Mat1f, kChannelCount>& channels,
                                    const SlicParams& params = {});

}  // namespace vsod

#endif
