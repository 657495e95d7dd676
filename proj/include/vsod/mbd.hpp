#ifndef VSOD_MBD_HPP
#define VSOD_MBD_HPP

#include <array>

#include <opencv2/core.hpp>

#include "vsod/features.hpp"

namespace vsod {

// Channels fed through the barrier-distance transform for the pixel cue.
constexpr std::array<int, 7> kMbdChannels = {kChL, kChA, kChBb, kChS,
                                             kChX, kChY, kChT};

/// Minimum barrier distance approximated by `passes` pairs of forward and
/// backward raster scans. Each pixel tracks the minimum and maximum along
/// its current best path, so every reported distance is realized by an
/// actual path: the result is always >= the true barrier distance.
cv::Mat1f mbd_transform(const cv::Mat1f& img, const cv::Mat1b& seeds, int passes = 3);

/// One-pixel image border, the seed set used for saliency.
cv::Mat1b border_seeds(cv::Size size);

/// Pixel-wise distance from the color statistics of the four border
/// bands, with the most dissimilar band dropped so a salient object
/// touching one edge does not mark the whole image as foreground.
cv::Mat1f backgroundness(const cv::Mat1f& l, const cv::Mat1f& a, const cv::Mat1f& b,
                         double band_frac = 0.02);

/// Geodesic reconstruction by dilation: grows marker under mask until
/// stable. Requires marker <= mask.
cv::Mat1f reconstruct_dilate(const cv::Mat1f& marker, const cv::Mat1f& mask);

/// Dual form: shrinks marker down toward mask. Requires marker >= mask.
cv::Mat1f reconstruct_erode(const cv::Mat1f& marker, const cv::Mat1f& mask);

/// Opening then closing by reconstruction with a square element whose
/// radius follows the map's mean activation.
cv::Mat1f smooth_morph(const cv::Mat1f& s, double gamma = 0.02);
int smooth_radius(const cv::Mat1f& s, double gamma);

struct PixelCueParams {
    int mbd_passes = 3;
    double smooth_gamma = 0.02;
    double border_band_frac = 0.02;
};

struct PixelCue {
    cv::Mat1f saliency;  // [0,1]
    cv::Mat1f mbd_sum;   // summed per-channel barrier distances, unscaled
};

PixelCue compute_pixel_cue(const std::array<cv::Mat1f, kChannelCount>& channels,
                           const PixelCueParams& params = {});

}  // namespace vsod

#endif
