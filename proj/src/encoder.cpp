#include "vsod/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace vsod {

std::uint64_t Rng::next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = next();
    } while (v >= limit);
    return v % n;
}

double Rng::unit() { return (next() >> 11) * 0x1.0p-53; }

double Rng::range(double lo, double hi) { return lo + unit() * (hi - lo); }

NormalizerStats fit_normalizer(const Eigen::MatrixXd& x) {
    NormalizerStats n;
    n.min = x.rowwise().minCoeff();
    n.max = x.rowwise().maxCoeff();
    return n;
}

Eigen::MatrixXd apply_normalizer(const NormalizerStats& n, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i) {
        const double lo = n.min(i), hi = n.max(i);
        if (hi - lo <= 0.0) {
            out.row(i).setZero();
            continue;
        }
        const double scale = 2.0 / (hi - lo);
        for (int j = 0; j < x.cols(); ++j)
            out(i, j) = std::clamp(x(i, j), lo, hi) * scale - 1.0 - lo * scale;
    }
    return out;
}

namespace {

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return 1.0 / (1.0 + (-z.array()).exp());
}

Eigen::VectorXd mean_activation(const Eigen::MatrixXd& h) {
    Eigen::VectorXd rho = h.rowwise().mean();
    for (int i = 0; i < rho.size(); ++i) rho(i) = std::clamp(rho(i), 1e-12, 1.0 - 1e-12);
    return rho;
}

}  // namespace

Eigen::MatrixXd encode(const AutoencoderLayer& layer, const Eigen::MatrixXd& x) {
    return sigmoid((layer.w_enc * x).colwise() + layer.b_enc);
}

double layer_objective(const AutoencoderLayer& layer, const Eigen::MatrixXd& x,
                       const EncoderHyperparams& hp) {
    const double n = static_cast<double>(x.cols());
    const Eigen::MatrixXd h = encode(layer, x);
    const Eigen::MatrixXd xhat = sigmoid((layer.w_dec * h).colwise() + layer.b_dec);
    const Eigen::MatrixXd target = (x.array() + 1.0) / 2.0;

    const double rec = (target - xhat).squaredNorm() / n;
    const double reg =
        0.5 * hp.lambda_w * (layer.w_enc.squaredNorm() + layer.w_dec.squaredNorm());

    const Eigen::VectorXd rho_hat = mean_activation(h);
    double kl = 0.0;
    for (int j = 0; j < rho_hat.size(); ++j)
        kl += hp.rho * std::log(hp.rho / rho_hat(j)) +
              (1.0 - hp.rho) * std::log((1.0 - hp.rho) / (1.0 - rho_hat(j)));

    return rec + reg + hp.lambda_s * kl;
}

LayerGradient layer_gradient(const AutoencoderLayer& layer, const Eigen::MatrixXd& x,
                             const EncoderHyperparams& hp) {
    const double n = static_cast<double>(x.cols());
    const Eigen::MatrixXd h = encode(layer, x);
    const Eigen::MatrixXd xhat = sigmoid((layer.w_dec * h).colwise() + layer.b_dec);
    const Eigen::MatrixXd target = (x.array() + 1.0) / 2.0;

    const Eigen::MatrixXd d_out =
        (2.0 / n) * (xhat - target).array() * xhat.array() * (1.0 - xhat.array());

    LayerGradient g;
    g.w_dec = d_out * h.transpose() + hp.lambda_w * layer.w_dec;
    g.b_dec = d_out.rowwise().sum();

    const Eigen::VectorXd rho_hat = mean_activation(h);
    Eigen::VectorXd d_rho(rho_hat.size());
    for (int j = 0; j < rho_hat.size(); ++j)
        d_rho(j) = hp.lambda_s * (-hp.rho / rho_hat(j) + (1.0 - hp.rho) / (1.0 - rho_hat(j))) / n;

    const Eigen::MatrixXd d_h = (layer.w_dec.transpose() * d_out).colwise() + d_rho;
    const Eigen::MatrixXd d_act = d_h.array() * h.array() * (1.0 - h.array());

    g.w_enc = d_act * x.transpose() + hp.lambda_w * layer.w_enc;
    g.b_enc = d_act.rowwise().sum();
    return g;
}

AutoencoderLayer init_layer(int in, int out, Rng& rng) {
    const double bound = std::sqrt(6.0 / (in + out));
    AutoencoderLayer layer;
    layer.w_enc.resize(out, in);
    layer.w_dec.resize(in, out);
    layer.b_enc = Eigen::VectorXd::Zero(out);
    layer.b_dec = Eigen::VectorXd::Zero(in);
    for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c) layer.w_enc(r, c) = rng.range(-bound, bound);
    for (int r = 0; r < in; ++r)
        for (int c = 0; c < out; ++c) layer.w_dec(r, c) = rng.range(-bound, bound);
    return layer;
}

AutoencoderLayer train_layer(const Eigen::MatrixXd& x, int out_dim,
                             const EncoderHyperparams& hp, Rng& rng) {
    const int in_dim = static_cast<int>(x.rows());
    const int n = static_cast<int>(x.cols());
    AutoencoderLayer layer = init_layer(in_dim, out_dim, rng);

    LayerGradient vel;
    vel.w_enc = Eigen::MatrixXd::Zero(out_dim, in_dim);
    vel.w_dec = Eigen::MatrixXd::Zero(in_dim, out_dim);
    vel.b_enc = Eigen::VectorXd::Zero(out_dim);
    vel.b_dec = Eigen::VectorXd::Zero(in_dim);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        const double lr = hp.lr * std::pow(0.5, epoch / hp.lr_halve_every);
        for (int i = n - 1; i > 0; --i)
            std::swap(order[i], order[static_cast<int>(rng.below(i + 1))]);

        for (int start = 0; start < n; start += hp.batch) {
            const int b = std::min(hp.batch, n - start);
            Eigen::MatrixXd batch(in_dim, b);
            for (int j = 0; j < b; ++j) batch.col(j) = x.col(order[start + j]);

            const LayerGradient g = layer_gradient(layer, batch, hp);
            vel.w_enc = hp.momentum * vel.w_enc - lr * g.w_enc;
            vel.w_dec = hp.momentum * vel.w_dec - lr * g.w_dec;
            vel.b_enc = hp.momentum * vel.b_enc - lr * g.b_enc;
            vel.b_dec = hp.momentum * vel.b_dec - lr * g.b_dec;
            layer.w_enc += vel.w_enc;
            layer.w_dec += vel.w_dec;
            layer.b_enc += vel.b_enc;
            layer.b_dec += vel.b_dec;
        }

        if (!layer.w_enc.allFinite() || !layer.w_dec.allFinite() || !layer.b_enc.allFinite() ||
            !layer.b_dec.allFinite())
            throw NumericalError("autoencoder weights diverged at epoch " +
                                 std::to_string(epoch) + " (layer " + std::to_string(in_dim) +
                                 "->" + std::to_string(out_dim) + ")");
    }
    return layer;
}

StackedEncoder train_stack(const Eigen::MatrixXd& samples, const EncoderHyperparams& hp,
                           std::uint64_t seed) {
    if (samples.cols() < 1000)
        throw ConfigError("encoder training needs at least 1000 samples, got " +
                          std::to_string(samples.cols()));

    Rng rng(seed);
    StackedEncoder enc;
    enc.hp = hp;
    enc.seed = seed;
    enc.input_dim = static_cast<int>(samples.rows());

    Eigen::MatrixXd cur = samples;
    Eigen::MatrixXd first_normalized;
    for (int t = 0; t < 4; ++t) {
        const NormalizerStats norm = fit_normalizer(cur);
        const Eigen::MatrixXd xn = apply_normalizer(norm, cur);
        if (t == 0) first_normalized = xn;
        AutoencoderLayer layer = train_layer(xn, kLayerSizes[t], hp, rng);
        cur = encode(layer, xn);
        enc.normalizers.push_back(norm);
        enc.layers.push_back(std::move(layer));
    }

    // Mean Pearson correlation between input dimensions and the scalar
    // code decides the orientation of the saliency score.
    const Eigen::RowVectorXd out = cur.row(0);
    const double out_mean = out.mean();
    const Eigen::RowVectorXd oc = out.array() - out_mean;
    const double out_ss = oc.squaredNorm();

    double csum = 0.0;
    for (int i = 0; i < first_normalized.rows(); ++i) {
        const Eigen::RowVectorXd row = first_normalized.row(i);
        const Eigen::RowVectorXd rc = row.array() - row.mean();
        const double rss = rc.squaredNorm();
        if (rss <= 0.0 || out_ss <= 0.0) continue;  // zero variance contributes 0
        csum += rc.dot(oc) / std::sqrt(rss * out_ss);
    }
    enc.corr_value = csum / first_normalized.rows();
    enc.corr_sign = enc.corr_value >= 0.0 ? 1 : -1;
    return enc;
}

Eigen::VectorXd infer_scalar(const StackedEncoder& enc, const Eigen::MatrixXd& x) {
    if (x.rows() != enc.input_dim)
        throw ConfigError("feature dimension " + std::to_string(x.rows()) +
                          " does not match model input " + std::to_string(enc.input_dim));
    Eigen::MatrixXd cur = x;
    for (size_t t = 0; t < enc.layers.size(); ++t)
        cur = encode(enc.layers[t], apply_normalizer(enc.normalizers[t], cur));
    return enc.corr_sign * cur.row(0).transpose();
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    return arr;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& arr, int rows, int cols) {
    if (static_cast<int>(arr.size()) != rows * cols)
        throw DataError("model matrix size mismatch");
    Eigen::MatrixXd m(rows, cols);
    int i = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = arr[i++].get<double>();
    return m;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
    Eigen::VectorXd v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) v(static_cast<int>(i)) = arr[i].get<double>();
    return v;
}

}  // namespace

void save_model(const ModelArtifact& model, const fs::path& file) {
    const StackedEncoder& enc = model.enc;
    nlohmann::json j;
    j["format"] = "vsod-model-v1";
    j["input_dim"] = enc.input_dim;
    j["window"] = model.window;
    j["cues"] = model.cues;
    j["seed"] = enc.seed;
    j["corr_value"] = enc.corr_value;
    j["corr_sign"] = enc.corr_sign;
    j["target_mapping"] = "unit_interval";  // decoder targets are (x+1)/2
    j["hyperparams"] = {{"lambda_w", enc.hp.lambda_w}, {"lambda_s", enc.hp.lambda_s},
                        {"rho", enc.hp.rho},           {"epochs", enc.hp.epochs},
                        {"batch", enc.hp.batch},       {"lr", enc.hp.lr},
                        {"lr_halve_every", enc.hp.lr_halve_every},
                        {"momentum", enc.hp.momentum}};

    j["layers"] = nlohmann::json::array();
    for (const auto& layer : enc.layers) {
        nlohmann::json lj;
        lj["in"] = layer.w_enc.cols();
        lj["out"] = layer.w_enc.rows();
        lj["w_enc"] = matrix_json(layer.w_enc);
        lj["b_enc"] = vector_json(layer.b_enc);
        lj["w_dec"] = matrix_json(layer.w_dec);
        lj["b_dec"] = vector_json(layer.b_dec);
        j["layers"].push_back(std::move(lj));
    }
    j["normalizers"] = nlohmann::json::array();
    for (const auto& n : enc.normalizers)
        j["normalizers"].push_back({{"min", vector_json(n.min)}, {"max", vector_json(n.max)}});

    fs::create_directories(file.parent_path().empty() ? "." : file.parent_path());
    std::ofstream out(file);
    if (!out) throw DataError("cannot write model to " + file.string());
    out << j.dump(2) << "\n";
}

ModelArtifact load_model(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open model " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad model file " + file.string() + ": " + e.what());
    }
    if (j.value("format", "") != "vsod-model-v1")
        throw DataError("unrecognized model format in " + file.string());

    ModelArtifact model;
    model.window = j.value("window", 1);
    model.cues = j.value("cues", std::vector<std::string>{"pixel", "superpixel", "object"});

    StackedEncoder& enc = model.enc;
    enc.input_dim = j["input_dim"].get<int>();
    enc.seed = j["seed"].get<std::uint64_t>();
    enc.corr_value = j["corr_value"].get<double>();
    enc.corr_sign = j["corr_sign"].get<int>();
    const auto& hj = j["hyperparams"];
    enc.hp.lambda_w = hj["lambda_w"].get<double>();
    enc.hp.lambda_s = hj["lambda_s"].get<double>();
    enc.hp.rho = hj["rho"].get<double>();
    enc.hp.epochs = hj["epochs"].get<int>();
    enc.hp.batch = hj["batch"].get<int>();
    enc.hp.lr = hj["lr"].get<double>();
    enc.hp.lr_halve_every = hj["lr_halve_every"].get<int>();
    enc.hp.momentum = hj["momentum"].get<double>();

    for (const auto& lj : j["layers"]) {
        AutoencoderLayer layer;
        const int in = lj["in"].get<int>(), out = lj["out"].get<int>();
        layer.w_enc = matrix_from_json(lj["w_enc"], out, in);
        layer.b_enc = vector_from_json(lj["b_enc"]);
        layer.w_dec = matrix_from_json(lj["w_dec"], in, out);
        layer.b_dec = vector_from_json(lj["b_dec"]);
        enc.layers.push_back(std::move(layer));
    }
    for (const auto& nj : j["normalizers"]) {
        NormalizerStats n;
        n.min = vector_from_json(nj["min"]);
        n.max = vector_from_json(nj["max"]);
        enc.normalizers.push_back(std::move(n));
    }
    if (enc.layers.size() != 4 || enc.normalizers.size() != 4)
        throw DataError("model in " + file.string() + " does not have 4 layers");
    return model;
}

Eigen::VectorXd assemble_features(const std::vector<CueMaps>& maps,
                                  const std::vector<FlowField>& flow, int t, int x, int y,
                                  int window, const std::array<bool, 3>& enabled) {
    static constexpr int kDx[9] = {0, 0, 1, 1, 1, 0, -1, -1, -1};
    static constexpr int kDy[9] = {0, -1, -1, 0, 1, 1, 1, 0, -1};

    const int nframes = static_cast<int>(maps.size());
    const int per_cue = 9 + window;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(3 * per_cue);

    auto cue_map = [&](int frame, int cue) -> const cv::Mat1f& {
        const CueMaps& m = maps[frame];
        return cue == 0 ? m.pixel : cue == 1 ? m.superpixel : m.object;
    };

    const int w = cue_map(t, 0).cols, h = cue_map(t, 0).rows;
    for (int cue = 0; cue < 3; ++cue) {
        if (!enabled[cue]) continue;
        const int base = cue * per_cue;
        const cv::Mat1f& m = cue_map(t, cue);
        for (int k = 0; k < 9; ++k) {
            const int px = std::clamp(x + kDx[k], 0, w - 1);
            const int py = std::clamp(y + kDy[k], 0, h - 1);
            v(base + k) = m(py, px);
        }
        int cx = x, cy = y;
        for (int j = 1; j <= window; ++j) {
            const FlowField& f = flow[std::min(t + j - 1, nframes - 1)];
            const int nx = std::clamp(static_cast<int>(std::lround(cx + f.u(cy, cx))), 0, w - 1);
            const int ny = std::clamp(static_cast<int>(std::lround(cy + f.v(cy, cx))), 0, h - 1);
            cx = nx;
            cy = ny;
            const int frame = std::min(t + j, nframes - 1);
            v(base + 9 + j - 1) = cue_map(frame, cue)(cy, cx);
        }
    }
    return v;
}

}  // namespace vsod
