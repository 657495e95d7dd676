#ifndef VSOD_COMMON_HPP
#define VSOD_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include <opencv2/core.hpp>

namespace vsod {

// Error categories mapped to CLI exit codes (1/2/3).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Worker count used by the OpenMP kernels. 0 means "one per core".
void set_num_threads(int n);
int num_threads();

/// parallel_for over [begin, end). Each index is handled by exactly one
/// worker, so results are identical for any thread count.
template <typename F>
void parallel_for(int begin, int end, F&& f) {
#pragma omp parallel for schedule(static) num_threads(num_threads())
    for (int i = begin; i < end; ++i) f(i);
}

/// Min-max rescale to [0,1]. A constant input maps to all zeros: no
/// contrast means no saliency, and downstream stages rely on that.
cv::Mat1f rescale_unit(const cv::Mat1f& m);

/// FNV-1a 64-bit over a byte string; used for config/model hashes in the
/// run manifest (stability matters, cryptographic strength does not).
std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace vsod

#endif
