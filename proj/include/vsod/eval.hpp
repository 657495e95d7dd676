#ifndef VSOD_EVAL_HPP
#define VSOD_EVAL_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <opencv2/core.hpp>

#include "vsod/common.hpp"

namespace vsod {

/// Binarizes at twice the mean saliency, capped at the map maximum
/// (>= rule).
cv::Mat1b adaptive_threshold(const cv::Mat1f& s);

/// (precision, recall) of mask M against ground truth G; an empty M
/// scores precision 0.
std::pair<double, double> precision_recall(const cv::Mat1b& m, const cv::Mat1b& g);

/// Mean |S - G| over all pixels, G taken as {0,1}.
double mae(const cv::Mat1f& s, const cv::Mat1b& g);

/// (1+b2) * p * r / (b2 * p + r), 0 when both inputs are 0.
double f_beta(double precision, double recall, double beta2 = 0.3);

struct KeyframeScore {
    std::string video_id;
    double precision = 0, recall = 0, mae = 0;
};

struct VideoScore {
    std::string video_id;
    double map = 0, mar = 0, mae = 0;
    int n = 0;  // scored keyframes
};

struct EvalReport {
    std::vector<VideoScore> per_video;
    double map = 0, mar = 0, f_beta = 0, mae = 0;
    double beta2 = 0.3;
    std::string threshold_policy = "2x-mean capped at max, >= rule";
};

/// Two-stage averaging: keyframes to per-video means, then an unweighted
/// mean over videos; videos appear in first-occurrence order.
EvalReport aggregate(const std::vector<KeyframeScore>& scores, double beta2 = 0.3);

struct CurvePoint {
    std::string video_id;
    double threshold = 0, precision = 0, recall = 0;
};

/// Scores predicted maps against ground-truth masks on disk. Ground
/// truth lives at <gt_root>/<video_id>/gt/mask_%06d.png (or mask files
/// directly under the video directory); predictions at
/// <pred_root>/<video_id>/sal_%06d.png, resized bilinearly to the
/// ground-truth resolution when needed. Keyframes with empty ground
/// truth are skipped.
EvalReport evaluate_directories(const std::filesystem::path& gt_root,
                                const std::filesystem::path& pred_root, double beta2 = 0.3,
                                std::vector<CurvePoint>* curves = nullptr);

/// ".json" writes the full report; ".csv" writes per-video rows
/// (video_id,map,mar,mae,n) plus an ALL row; any other suffix writes
/// both files alongside the given path.
void write_report(const EvalReport& report, const std::filesystem::path& out);
void write_curves(const std::vector<CurvePoint>& curves, const std::filesystem::path& out);

}  // namespace vsod

#endif
