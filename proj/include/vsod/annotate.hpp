#ifndef VSOD_ANNOTATE_HPP
#define VSOD_ANNOTATE_HPP

#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "vsod/dataset.hpp"

namespace vsod {

struct DensityParams {
    double sigma_s_frac = 0.03;   // of the longer frame side, in pixels
    double sigma_t = 0.1;         // seconds
    double temporal_cutoff = 4.0; // in units of sigma_t; e^-8 tail dropped
    double score_threshold = 50.0;
    int keyframe_stride = 15;
};

/// Accumulated spatio-temporal Gaussian mass of all fixations after
/// display time t (within the cutoff), evaluated at every pixel.
cv::Mat1f density_raster(const FixationLog& fixations, double t, cv::Size size,
                         const DensityParams& params);

/// Mean of the density raster over the object's pixels.
double fixation_density(const cv::Mat1b& mask, double t, const FixationLog& fixations,
                        cv::Size size, const DensityParams& params);

struct ObjectScore {
    int label = 0;
    std::vector<std::pair<int, double>> per_keyframe;  // (frame_index, density)
    double video_score = 0.0;  // mean over keyframes where the object appears
};

std::vector<ObjectScore> score_objects(const ObjectMaskSet& masks, const FixationLog& fixations,
                                       double fps, cv::Size size, const DensityParams& params);

/// Labels scoring at or above the threshold; if none qualify, the single
/// best label (ties to the smallest label).
std::vector<int> select_salient(const std::vector<ObjectScore>& scores,
                                const DensityParams& params);

struct GtEmission {
    struct Discard {
        int frame_index = 0;
        std::string reason;  // "background-only" or "split"
    };
    std::vector<MaskKeyframe> masks;  // binary: 1 = salient union
    std::vector<Discard> discards;
};

/// Binary union of the selected labels per keyframe; keyframes with an
/// empty union or a selected object broken into several 4-connected
/// parts are discarded with a reason.
GtEmission emit_gt_masks(const ObjectMaskSet& masks, const std::vector<int>& salient);

/// Per video: resize masks to out_size, sum, normalize to max 1; then
/// sum the per-video maps and normalize to max 1 again, so every video
/// contributes equally regardless of length.
cv::Mat1f average_annotation_map(const std::vector<std::vector<cv::Mat1b>>& videos,
                                 cv::Size out_size);

struct DatasetStats {
    double obj_count_mean = 0, obj_count_std = 0;
    double area_mean = 0, area_std = 0;  // percent of frame
    int keyframes = 0;
};

/// Connected foreground components and area fraction per keyframe,
/// mean and population standard deviation across all keyframes.
DatasetStats dataset_stats(const std::vector<std::vector<cv::Mat1b>>& videos);

}  // namespace vsod

#endif
