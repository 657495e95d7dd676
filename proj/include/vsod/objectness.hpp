#ifndef VSOD_OBJECTNESS_HPP
#define VSOD_OBJECTNESS_HPP

#include <filesystem>
#include <vector>

#include <opencv2/core.hpp>

#include "vsod/features.hpp"

namespace vsod {

struct Proposal {
    cv::Mat1b mask;  // nonzero = member pixel
    double objectness = 0.0;
};

struct ProposalSet {
    std::vector<Proposal> proposals;  // sorted by objectness descending
};

struct FixationDensityMaps {
    cv::Mat1f lab, hsv, xyt;  // non-negative, each sums to 1
};

/// Baseline proposal generator: threshold the summed barrier-distance
/// raster at 16 evenly spaced levels, collect connected components,
/// deduplicate near-identical masks (IoU >= 0.9), keep the top k by
/// objectness = solidity x border factor x area prior peaked at 15% of
/// the frame. A constant raster yields one whole-frame proposal with
/// objectness 0.
ProposalSet generate_proposals_from_sum(const cv::Mat1f& mbd_sum, int k);

/// Same, computing the barrier-distance raster from the channel stack.
ProposalSet generate_proposals(const std::array<cv::Mat1f, kChannelCount>& channels, int k,
                               int mbd_passes = 3);

/// Spectral-residual fixation predictor per color space (Lab, HSV, XYT):
/// per channel, inverse transform of (log amplitude minus its 3x3 local
/// average) with the original phase, squared, summed over the space's
/// channels, blurred (sigma = 3% of max side), rescaled and normalized
/// to sum 1. A flat frame yields the uniform density.
FixationDensityMaps predict_fixation_maps(const std::array<cv::Mat1f, kChannelCount>& channels);

/// Share of the density mass inside the mask; 0 for an empty mask.
double fixation_ratio(const cv::Mat1b& mask, const cv::Mat1f& density);

/// Sum over proposals of member-indicator x product of the three
/// fixation ratios, before any rescaling.
cv::Mat1f object_saliency_raw(const ProposalSet& props, const FixationDensityMaps& maps);

/// Rescaled-to-[0,1] version of the accumulator above.
cv::Mat1f object_saliency(const ProposalSet& props, const FixationDensityMaps& maps);

// File providers, for plugging in externally computed inputs:
//   <video_id>/proposals/mask_%06d_%03d.png  + proposals/objectness.csv
//     (header frame,index,objectness)
//   <video_id>/fixmaps/{lab,hsv,xyt}_%06d.png  8-bit, renormalized at load
ProposalSet load_proposals(const std::filesystem::path& video_dir, int frame_index, int k);
FixationDensityMaps load_fixation_maps(const std::filesystem::path& video_dir, int frame_index);

}  // namespace vsod

#endif
