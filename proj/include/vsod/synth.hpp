#ifndef VSOD_SYNTH_HPP
#define VSOD_SYNTH_HPP

#include <cstdint>
#include <filesystem>

#include <opencv2/core.hpp>

namespace vsod {

// Synthetic motion-discrimination suite: per video one moving
// high-contrast rectangle (~15% of the frame), a textured background
// with per-frame sensor noise, and one static distractor that flickers
// between a bright and a near-background tone on alternate frames.
// Ground truth covers the moving rectangle only, at keyframe stride.
struct SynthParams {
    int videos = 5;
    int frames = 60;
    cv::Size size = {200, 112};
    int keyframe_stride = 15;
    double noise = 8.0;  // uniform amplitude, 8-bit counts
    std::uint64_t seed = 7;
};

void generate_suite(const std::filesystem::path& root, const SynthParams& params = {});

/// Tiny single-video dataset with three labeled objects and a fixation
/// log concentrated on object 2, for exercising the annotation path.
void generate_annotate_fixture(const std::filesystem::path& root);

}  // namespace vsod

#endif
