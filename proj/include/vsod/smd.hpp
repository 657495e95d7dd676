#ifndef VSOD_SMD_HPP
#define VSOD_SMD_HPP

#include <vector>

#include <Eigen/Dense>
#include <opencv2/core.hpp>

#include "vsod/slic.hpp"

namespace vsod {

/// Column j = per-superpixel means of the 12 channels, their variances,
/// and the normalized centroid (26 rows); each row min-max rescaled.
Eigen::MatrixXd build_feature_matrix(const SuperpixelSegmentation& seg,
                                     const std::array<cv::Mat1f, kChannelCount>& channels);

/// Product of a centered Gaussian location prior (sigma = 0.25 x frame
/// diagonal), color distinctness against the image mean, and a 0.5
/// penalty for superpixels touching the border. Values in [0,1].
Eigen::VectorXd superpixel_priors(const SuperpixelSegmentation& seg,
                                  const std::array<cv::Mat1f, kChannelCount>& channels);

/// Singular-value thresholding: the proximal operator of tau * nuclear norm.
Eigen::MatrixXd svt(const Eigen::MatrixXd& m, double tau);

struct SmdParams {
    double lambda = 0.0;  // 0 picks 1/sqrt(max(d, n))
    int max_iters = 200;
    double tol = 1e-6;
};

struct SmdResult {
    Eigen::MatrixXd L, E;
    // ||L||_* + lambda * sum_j w_j ||F_j - L_j||_2 per iteration, the
    // objective of the feasible pair implied by each L iterate.
    std::vector<double> objective;
    double residual = 0.0;          // ||F - L - E||_F / ||F||_F of the returned pair
    int iterations = 0;
    bool converged = false;
    bool monotone = true;  // objective never increased (beyond fp noise)
};

/// min ||L||_* + lambda * sum_j w_j ||E_j||_2  s.t.  L + E = F, by an
/// inexact augmented Lagrangian. On non-convergence the best (lowest
/// residual) iterate is returned with converged = false.
SmdResult smd_decompose(const Eigen::MatrixXd& F, const Eigen::VectorXd& priors,
                        const SmdParams& params = {});

struct SuperpixelCueParams {
    SlicParams slic;
    SmdParams smd;
};

/// Full superpixel cue: segment, decompose, broadcast the rescaled
/// column norms of E back to pixels.
cv::Mat1f superpixel_saliency(const std::array<cv::Mat1f, kChannelCount>& channels,
                              const SuperpixelCueParams& params = {});

}  // namespace vsod

#endif
