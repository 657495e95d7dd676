#include "vsod/smd.hpp"

#include <algorithm>
#include <cmath>

namespace vsod {

Eigen::MatrixXd build_feature_matrix(const SuperpixelSegmentation& seg,
                                     const std::array<cv::Mat1f, kChannelCount>& channels) {
    const int n = seg.n;
    const int w = seg.labels.cols, h = seg.labels.rows;
    const int d = 2 * kChannelCount + 2;

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(kChannelCount, n);
    Eigen::MatrixXd sum2 = Eigen::MatrixXd::Zero(kChannelCount, n);
    Eigen::VectorXd cnt = Eigen::VectorXd::Zero(n);

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int j = seg.labels(y, x);
            cnt(j) += 1;
            for (int c = 0; c < kChannelCount; ++c) {
                const double v = channels[c](y, x);
                sum(c, j) += v;
                sum2(c, j) += v * v;
            }
        }

    Eigen::MatrixXd F(d, n);
    for (int j = 0; j < n; ++j) {
        for (int c = 0; c < kChannelCount; ++c) {
            const double m = sum(c, j) / cnt(j);
            F(c, j) = m;
            F(kChannelCount + c, j) = std::max(sum2(c, j) / cnt(j) - m * m, 0.0);
        }
        F(2 * kChannelCount, j) = seg.centroids[j].x / w;
        F(2 * kChannelCount + 1, j) = seg.centroids[j].y / h;
    }

    for (int r = 0; r < d; ++r) {
        const double lo = F.row(r).minCoeff(), hi = F.row(r).maxCoeff();
        if (hi - lo > 0)
            F.row(r) = (F.row(r).array() - lo) / (hi - lo);
        else
            F.row(r).setZero();
    }
    return F;
}

Eigen::VectorXd superpixel_priors(const SuperpixelSegmentation& seg,
                                  const std::array<cv::Mat1f, kChannelCount>& channels) {
    const int n = seg.n;
    const int w = seg.labels.cols, h = seg.labels.rows;

    Eigen::MatrixXd lab_sum = Eigen::MatrixXd::Zero(3, n);
    Eigen::VectorXd cnt = Eigen::VectorXd::Zero(n);
    Eigen::Vector3d global = Eigen::Vector3d::Zero();
    std::vector<char> border(n, 0);
    const int lab_ch[3] = {kChL, kChA, kChBb};

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int j = seg.labels(y, x);
            cnt(j) += 1;
            for (int c = 0; c < 3; ++c) {
                const double v = channels[lab_ch[c]](y, x);
                lab_sum(c, j) += v;
                global(c) += v;
            }
            if (x == 0 || y == 0 || x == w - 1 || y == h - 1) border[j] = 1;
        }
    global /= w * h;

    Eigen::VectorXd dist(n), gauss(n);
    const double sigma = 0.25 * std::sqrt(static_cast<double>(w) * w + static_cast<double>(h) * h);
    for (int j = 0; j < n; ++j) {
        const Eigen::Vector3d mean = lab_sum.col(j) / cnt(j);
        dist(j) = (mean - global).norm();
        const double dx = seg.centroids[j].x - 0.5 * w;
        const double dy = seg.centroids[j].y - 0.5 * h;
        gauss(j) = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
    }
    const double lo = dist.minCoeff(), hi = dist.maxCoeff();
    if (hi - lo > 0)
        dist = (dist.array() - lo) / (hi - lo);
    else
        dist.setZero();

    Eigen::VectorXd priors(n);
    for (int j = 0; j < n; ++j)
        priors(j) = gauss(j) * dist(j) * (border[j] ? 0.5 : 1.0);
    return priors;
}

Eigen::MatrixXd svt(const Eigen::MatrixXd& m, double tau) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = svd.singularValues();
    for (int i = 0; i < s.size(); ++i) s(i) = std::max(s(i) - tau, 0.0);
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

SmdResult smd_decompose(const Eigen::MatrixXd& F, const Eigen::VectorXd& priors,
                        const SmdParams& params) {
    const int d = static_cast<int>(F.rows()), n = static_cast<int>(F.cols());
    CV_Assert(priors.size() == n);

    SmdResult res;
    res.L = Eigen::MatrixXd::Zero(d, n);
    res.E = Eigen::MatrixXd::Zero(d, n);

    const double fnorm = F.norm();
    if (fnorm == 0.0) {
        res.converged = true;
        return res;
    }

    const double lambda =
        params.lambda > 0 ? params.lambda : 1.0 / std::sqrt(static_cast<double>(std::max(d, n)));

    Eigen::JacobiSVD<Eigen::MatrixXd> svd0(F);
    const double spectral = svd0.singularValues()(0);
    double mu = 1.25 / spectral;
    const double mu_max = mu * 1e7;

    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, n);
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d, n);
    Eigen::MatrixXd Y = F / spectral;

    double best_residual = 1.0;
    double prev_obj = 0.0;

    for (int it = 0; it < params.max_iters; ++it) {
        // L step: prox of the nuclear norm at F - E + Y/mu.
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(F - E + Y / mu,
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);
        Eigen::VectorXd s = svd.singularValues();
        double nuclear = 0.0;
        for (int i = 0; i < s.size(); ++i) {
            s(i) = std::max(s(i) - 1.0 / mu, 0.0);
            nuclear += s(i);
        }
        L = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();

        // E step: column-wise group soft-threshold of F - L + Y/mu.
        const Eigen::MatrixXd V = F - L + Y / mu;
        for (int j = 0; j < n; ++j) {
            const double thr = lambda * priors(j) / mu;
            const double vn = V.col(j).norm();
            const double scale = vn > thr ? (vn - thr) / vn : 0.0;
            E.col(j) = V.col(j) * scale;
        }

        // Progress is measured at the feasible point (L, F - L). The raw
        // (L, E) pair is infeasible while mu is small and its objective
        // approaches the optimum from below.
        double group = 0.0;
        for (int j = 0; j < n; ++j) group += priors(j) * (F.col(j) - L.col(j)).norm();
        const double obj = nuclear + lambda * group;
        res.objective.push_back(obj);
        if (it > 0 && obj > prev_obj * (1.0 + 1e-9) + 1e-12) res.monotone = false;
        prev_obj = obj;

        const Eigen::MatrixXd R = F - L - E;
        const double residual = R.norm() / fnorm;
        if (residual < best_residual) {
            best_residual = residual;
            res.L = L;
            res.E = E;
            res.residual = residual;
        }
        res.iterations = it + 1;
        if (residual <= params.tol) {
            res.converged = true;
            break;
        }
        Y += mu * R;
        mu = std::min(mu * 1.5, mu_max);
    }
    return res;
}

cv::Mat1f superpixel_saliency(const std::array<cv::Mat1f, kChannelCount>& channels,
                              const SuperpixelCueParams& params) {
    const SuperpixelSegmentation seg = slic_segment(channels, params.slic);
    const Eigen::MatrixXd F = build_feature_matrix(seg, channels);
    const Eigen::VectorXd priors = superpixel_priors(seg, channels);
    const SmdResult res = smd_decompose(F, priors, params.smd);

    Eigen::VectorXd colnorm(seg.n);
    for (int j = 0; j < seg.n; ++j) colnorm(j) = res.E.col(j).norm();
    const double lo = colnorm.minCoeff(), hi = colnorm.maxCoeff();
    if (hi - lo > 0)
        colnorm = (colnorm.array() - lo) / (hi - lo);
    else
        colnorm.setZero();

    cv::Mat1f out(seg.labels.size());
    parallel_for(0, out.rows, [&](int y) {
        for (int x = 0; x < out.cols; ++x)
            out(y, x) = static_cast<float>(colnorm(seg.labels(y, x)));
    });
    return out;
}

}  // namespace vsod
