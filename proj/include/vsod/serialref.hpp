#ifndef VSOD_SERIALREF_HPP
#define VSOD_SERIALREF_HPP

#include <opencv2/core.hpp>

namespace vsod::serial {

// Single-threaded twins of the OpenMP kernels. They perform the same
// per-pixel arithmetic in the same order, so outputs must match the
// parallel versions bit for bit; tests assert that and the benchmark
// target measures the speedup.

void to_lab(const cv::Mat& rgb, cv::Mat1f& l, cv::Mat1f& a, cv::Mat1f& b);
void to_hsv(const cv::Mat& rgb, cv::Mat1f& h, cv::Mat1f& s, cv::Mat1f& v);
cv::Mat1f to_gray(const cv::Mat& rgb);
void hs_average(const cv::Mat1f& f, cv::Mat1f& out);
cv::Mat1f warp_bilinear(const cv::Mat1f& img, const cv::Mat1f& u, const cv::Mat1f& v);

}  // namespace vsod::serial

#endif
