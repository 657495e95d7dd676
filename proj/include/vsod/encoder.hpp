#ifndef VSOD_ENCODER_HPP
#define VSOD_ENCODER_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <opencv2/core.hpp>

#include "vsod/features.hpp"

namespace vsod {

/// Deterministic RNG wrapper. Bounded draws use rejection sampling so
/// sequences do not depend on the standard library's distribution
/// implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    std::uint64_t below(std::uint64_t n);             // uniform in [0, n)
    double unit();                                    // uniform in [0, 1)
    double range(double lo, double hi);               // uniform in [lo, hi)

  private:
    std::uint64_t state_;
};

struct EncoderHyperparams {
    double lambda_w = 0.001;
    double lambda_s = 1.0;
    double rho = 0.05;
    int epochs = 100;
    int batch = 256;
    double lr = 0.1;
    int lr_halve_every = 25;
    double momentum = 0.9;
};

struct AutoencoderLayer {
    Eigen::MatrixXd w_enc;  // out x in
    Eigen::VectorXd b_enc;  // out
    Eigen::MatrixXd w_dec;  // in x out
    Eigen::VectorXd b_dec;  // in
};

struct NormalizerStats {
    Eigen::VectorXd min, max;  // per input dimension
};

// Layer schedule after the input layer.
inline constexpr int kLayerSizes[4] = {15, 7, 3, 1};

struct StackedEncoder {
    std::vector<AutoencoderLayer> layers;
    std::vector<NormalizerStats> normalizers;
    double corr_value = 0.0;
    int corr_sign = 1;
    EncoderHyperparams hp;
    std::uint64_t seed = 0;
    int input_dim = 30;
};

/// Maps each dimension affinely to [-1,1] by the stored min/max,
/// clamping values outside the stored range; constant dimensions map
/// to 0.
NormalizerStats fit_normalizer(const Eigen::MatrixXd& x);
Eigen::MatrixXd apply_normalizer(const NormalizerStats& n, const Eigen::MatrixXd& x);

Eigen::MatrixXd encode(const AutoencoderLayer& layer, const Eigen::MatrixXd& x);

/// Objective over a sample matrix (columns = samples, values in [-1,1]):
/// mean squared reconstruction error against targets (x+1)/2, plus
/// lambda_w/2 (||W_enc||_F^2 + ||W_dec||_F^2), plus lambda_s sum_j
/// KL(rho || mean activation of unit j).
double layer_objective(const AutoencoderLayer& layer, const Eigen::MatrixXd& x,
                       const EncoderHyperparams& hp);

struct LayerGradient {
    Eigen::MatrixXd w_enc, w_dec;
    Eigen::VectorXd b_enc, b_dec;
};

/// Analytic gradient of layer_objective; the trainer consumes exactly
/// this, so the finite-difference check covers the production path.
LayerGradient layer_gradient(const AutoencoderLayer& layer, const Eigen::MatrixXd& x,
                             const EncoderHyperparams& hp);

AutoencoderLayer init_layer(int in, int out, Rng& rng);

/// Mini-batch gradient descent with momentum over shuffled samples.
AutoencoderLayer train_layer(const Eigen::MatrixXd& x, int out_dim,
                             const EncoderHyperparams& hp, Rng& rng);

/// Layerwise training through the full schedule; computes the mean
/// Pearson correlation between input dimensions and the final scalar
/// code, whose sign orients the saliency score.
StackedEncoder train_stack(const Eigen::MatrixXd& samples, const EncoderHyperparams& hp,
                           std::uint64_t seed);

/// Scalar codes for a batch of raw cue vectors (columns), sign applied.
Eigen::VectorXd infer_scalar(const StackedEncoder& enc, const Eigen::MatrixXd& x);

struct ModelArtifact {
    StackedEncoder enc;
    std::vector<std::string> cues;  // enabled cue names, pipeline metadata
    int window = 1;
};

void save_model(const ModelArtifact& model, const std::filesystem::path& file);
ModelArtifact load_model(const std::filesystem::path& file);

// Per-frame cue maps feeding feature assembly.
struct CueMaps {
    cv::Mat1f pixel, superpixel, object;
};

/// Cue-major feature vector for pixel (x, y) of frame t: per enabled cue
/// the center value, its 8 clamped spatial neighbors, then `window`
/// temporal values found by following the flow field frame to frame.
/// Disabled cues contribute zero blocks. Length 3 * (9 + window).
Eigen::VectorXd assemble_features(const std::vector<CueMaps>& maps,
                                  const std::vector<FlowField>& flow, int t, int x, int y,
                                  int window, const std::array<bool, 3>& enabled);

}  // namespace vsod

#endif
