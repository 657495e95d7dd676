#ifndef VSOD_DATASET_HPP
#define VSOD_DATASET_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "vsod/common.hpp"

namespace vsod {

// Expected on-disk layout per video:
//   <video_id>/frames/frame_%06d.png       8-bit color frames
//   <video_id>/fixations.csv               header: x,y,t,subject
//   <video_id>/objects/mask_%06d.png       16-bit label maps (annotation input)
//   <video_id>/gt/mask_%06d.png            binary salient-object masks
//   <video_id>/meta.json                   optional {"fps":..., "video_id":...}
// Saliency output: <out>/<video_id>/sal_%06d.png, 8-bit grayscale.

struct FrameSequence {
    std::string video_id;
    std::vector<cv::Mat> frames;  // CV_8UC3, RGB order
    double fps = 30.0;
    cv::Size original_size;
};

struct Fixation {
    double x = 0, y = 0;  // pixels, clamped to frame bounds at load
    double t = 0;         // seconds
    int subject = 0;
};

struct FixationLog {
    std::vector<Fixation> records;
    int clamp_warnings = 0;  // out-of-frame coordinates clamped at load
};

struct MaskKeyframe {
    int frame_index = 0;
    cv::Mat1w labels;  // 0 = background, k > 0 = object k
};

struct ObjectMaskSet {
    std::vector<MaskKeyframe> keyframes;  // sorted by frame_index
};

/// Decodes all frames of one video in filename order.
FrameSequence load_video(const std::filesystem::path& dir);

/// Downscales so the longer side equals max_side (never upscales),
/// preserving aspect ratio to the nearest integer, bilinear.
cv::Mat resize_max_side(const cv::Mat& frame, int max_side);

FixationLog load_fixations(const std::filesystem::path& file, cv::Size frame_size);

/// Loads the 16-bit label maps; labels whose total pixel count is below
/// 16 are cleared to background.
ObjectMaskSet load_object_masks(const std::filesystem::path& dir);

/// Binary ground-truth masks (any nonzero pixel counts as foreground).
std::vector<MaskKeyframe> load_binary_masks(const std::filesystem::path& dir);

cv::Mat1f load_saliency_map(const std::filesystem::path& file);
void write_saliency_map(const cv::Mat1f& map, const std::filesystem::path& file);
void write_binary_mask(const cv::Mat1b& mask, const std::filesystem::path& file);
void write_label_map(const cv::Mat1w& labels, const std::filesystem::path& file);

/// Subdirectories of `root` that contain a frames/ directory, sorted.
std::vector<std::filesystem::path> list_videos(const std::filesystem::path& root);

std::string frame_name(const char* prefix, int index);  // e.g. sal_000001.png

}  // namespace vsod

#endif
