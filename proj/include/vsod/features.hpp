#ifndef VSOD_FEATURES_HPP
#define VSOD_FEATURES_HPP

#include <array>
#include <memory>
#include <vector>

#include <opencv2/core.hpp>

#include "vsod/dataset.hpp"

namespace vsod {

// Per-frame feature channels, each CV_32F in [0, 1]:
//   R, G, B      linear byte values / 255
//   L, a, b      CIELAB (D65), L/100, (a+128)/255, (b+128)/255
//   H, S, V      hue/360, saturation, value
//   X, Y         |u|, |v| of forward optical flow, min-max rescaled per frame
//   T            |L_t - L_{t-1}|, zero on the first frame
enum ChannelIndex {
    kChR = 0, kChG, kChB, kChL, kChA, kChBb,
    kChH, kChS, kChV, kChX, kChY, kChT,
    kChannelCount
};

const char* channel_name(int c);

/// CIELAB from 8-bit RGB. L in [0,100], a/b roughly [-128,127].
void to_lab(const cv::Mat& rgb, cv::Mat1f& l, cv::Mat1f& a, cv::Mat1f& b);

/// HSV from 8-bit RGB. H in [0,360), S and V in [0,1].
void to_hsv(const cv::Mat& rgb, cv::Mat1f& h, cv::Mat1f& s, cv::Mat1f& v);

/// Rec.601 luminance in [0,255].
cv::Mat1f to_gray(const cv::Mat& rgb);

/// Per-pixel |cur - prev| of the rescaled L channel; symmetric, already
/// in [0,1] so no further rescaling is applied.
cv::Mat1f compute_flicker(const cv::Mat1f& l_cur, const cv::Mat1f& l_prev);

struct FlowParams {
    double alpha = 15.0;  // smoothness weight for 0..255 intensities
    int levels = 4;
    int iterations = 100;
};

struct FlowField {
    cv::Mat1f u, v;  // pixels, +u right, +v down
};

class FlowEstimator {
  public:
    virtual ~FlowEstimator() = default;
    virtual FlowField compute(const cv::Mat1f& prev, const cv::Mat1f& next) const = 0;
};

/// Weighted 3x3 neighborhood average used by the Horn-Schunck update
/// (edges 1/6, corners 1/12, center excluded; replicated border).
void hs_average(const cv::Mat1f& f, cv::Mat1f& out);

/// Samples img at (x + u, y + v) bilinearly, clamped to the border.
cv::Mat1f warp_bilinear(const cv::Mat1f& img, const cv::Mat1f& u, const cv::Mat1f& v);

/// Pyramidal Horn-Schunck with Jacobi updates; output is identical for
/// any thread count.
class HornSchunckFlow : public FlowEstimator {
  public:
    explicit HornSchunckFlow(FlowParams params = {}) : params_(params) {}
    FlowField compute(const cv::Mat1f& prev, const cv::Mat1f& next) const override;

  private:
    FlowParams params_;
};

/// Forward flow per frame; the last frame has no successor and gets a
/// zero field.
std::vector<FlowField> compute_flow(const FrameSequence& seq, const FlowEstimator& est);

struct ChannelStack {
    std::vector<std::array<cv::Mat1f, kChannelCount>> frames;

    int frame_count() const { return static_cast<int>(frames.size()); }
    const cv::Mat1f& at(int frame, int channel) const { return frames[frame][channel]; }
};

struct ChannelParams {
    bool signed_flow = false;  // keep u/v signs in X/Y instead of |u|/|v|
};

ChannelStack compute_channels(const FrameSequence& seq, const std::vector<FlowField>& flow,
                              const ChannelParams& params = {});

}  // namespace vsod

#endif
