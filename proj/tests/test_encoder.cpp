#include <doctest.h>

#include <unistd.h>

#include "vsod/encoder.hpp"

using namespace vsod;
namespace fs = std::filesystem;

namespace {

Eigen::MatrixXd latent_samples(int dim, int n, std::uint64_t seed, double noise) {
    // One positive latent factor plus noise, so every dimension
    // correlates positively with the underlying signal.
    Rng rng(seed);
    Eigen::VectorXd a(dim);
    for (int i = 0; i < dim; ++i) a(i) = rng.range(0.5, 1.5);
    Eigen::MatrixXd x(dim, n);
    for (int j = 0; j < n; ++j) {
        const double z = rng.unit();
        for (int i = 0; i < dim; ++i) x(i, j) = a(i) * z + rng.range(-noise, noise);
    }
    return x;
}

double max_rel_gradient_error(int in_dim, int out_dim, std::uint64_t seed) {
    Rng rng(seed);
    const int n = 48;
    Eigen::MatrixXd x(in_dim, n);
    for (int i = 0; i < in_dim; ++i)
        for (int j = 0; j < n; ++j) x(i, j) = rng.range(-1.0, 1.0);

    EncoderHyperparams hp;
    AutoencoderLayer layer = init_layer(in_dim, out_dim, rng);
    const LayerGradient grad = layer_gradient(layer, x, hp);

    const double eps = 1e-6;
    double max_err = 0.0;
    auto probe = [&](double* param, double analytic) {
        const double save = *param;
        *param = save + eps;
        const double fp = layer_objective(layer, x, hp);
        *param = save - eps;
        const double fm = layer_objective(layer, x, hp);
        *param = save;
        const double numeric = (fp - fm) / (2 * eps);
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        max_err = std::max(max_err, std::abs(numeric - analytic) / denom);
    };

    for (int i = 0; i < layer.w_enc.rows(); ++i)
        for (int j = 0; j < layer.w_enc.cols(); ++j)
            probe(&layer.w_enc(i, j), grad.w_enc(i, j));
    for (int i = 0; i < layer.w_dec.rows(); ++i)
        for (int j = 0; j < layer.w_dec.cols(); ++j)
            probe(&layer.w_dec(i, j), grad.w_dec(i, j));
    for (int i = 0; i < layer.b_enc.size(); ++i) probe(&layer.b_enc(i), grad.b_enc(i));
    for (int i = 0; i < layer.b_dec.size(); ++i) probe(&layer.b_dec(i), grad.b_dec(i));
    return max_err;
}

}  // namespace

TEST_CASE("rng sequences are reproducible and in range") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next() == b.next());
        const double u = a.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        b.unit();
        const std::uint64_t k = a.below(17);
        CHECK(k < 17);
        b.below(17);
    }
}

TEST_CASE("different seeds give different streams") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += a.next() == b.next();
    CHECK(same == 0);
}

TEST_CASE("normalizer maps observed extremes to -1 and 1") {
    Eigen::MatrixXd x(2, 3);
    x << 0.0, 5.0, 10.0,
         4.0, 4.0, 4.0;  // constant dimension
    const NormalizerStats stats = fit_normalizer(x);
    const Eigen::MatrixXd n = apply_normalizer(stats, x);
    CHECK(n(0, 0) == doctest::Approx(-1.0));
    CHECK(n(0, 1) == doctest::Approx(0.0));
    CHECK(n(0, 2) == doctest::Approx(1.0));
    CHECK(n(1, 0) == 0.0);
    CHECK(n(1, 2) == 0.0);

    Eigen::MatrixXd outside(2, 1);
    outside << 20.0, 9.0;
    const Eigen::MatrixXd c = apply_normalizer(stats, outside);
    CHECK(c(0, 0) == doctest::Approx(1.0));  // clamped
}

TEST_CASE("analytic gradients match finite differences") {
    CHECK(max_rel_gradient_error(30, 15, 51) <= 1e-4);
    CHECK(max_rel_gradient_error(3, 1, 52) <= 1e-4);
}

TEST_CASE("training reduces the layer objective") {
    const Eigen::MatrixXd x = latent_samples(10, 600, 61, 0.1);
    const NormalizerStats stats = fit_normalizer(x);
    const Eigen::MatrixXd n = apply_normalizer(stats, x);

    EncoderHyperparams hp;
    hp.epochs = 30;
    Rng rng(62);
    const AutoencoderLayer before = init_layer(10, 5, rng);
    Rng rng2(62);
    const AutoencoderLayer after = train_layer(n, 5, hp, rng2);
    CHECK(layer_objective(after, n, hp) < layer_objective(before, n, hp));
}

TEST_CASE("stack training needs a thousand samples") {
    const Eigen::MatrixXd x = latent_samples(30, 999, 63, 0.1);
    EncoderHyperparams hp;
    hp.epochs = 1;
    CHECK_THROWS_AS(train_stack(x, hp, 1), ConfigError);
}

TEST_CASE("the oriented scalar rises with the latent signal") {
    const Eigen::MatrixXd x = latent_samples(30, 3000, 64, 0.05);
    EncoderHyperparams hp;
    hp.epochs = 25;
    const StackedEncoder enc = train_stack(x, hp, 7);
    REQUIRE(enc.layers.size() == 4);

    Eigen::MatrixXd probes(30, 2);
    probes.col(0) = Eigen::VectorXd::Constant(30, 0.05);  // weak signal
    probes.col(1) = Eigen::VectorXd::Constant(30, 1.30);  // strong signal
    const Eigen::VectorXd s = infer_scalar(enc, probes);
    CHECK(s(1) > s(0));
}

TEST_CASE("models survive a save/load round trip bit for bit") {
    const Eigen::MatrixXd x = latent_samples(30, 1500, 65, 0.1);
    EncoderHyperparams hp;
    hp.epochs = 3;
    ModelArtifact model;
    model.enc = train_stack(x, hp, 11);
    model.cues = {"pixel", "superpixel", "object"};
    model.window = 1;

    const fs::path file = fs::temp_directory_path() /
                          ("vsod_model_" + std::to_string(getpid()) + ".json");
    save_model(model, file);
    const ModelArtifact back = load_model(file);
    save_model(back, file);  // second save must be byte-identical
    const ModelArtifact back2 = load_model(file);

    REQUIRE(back.enc.layers.size() == 4);
    CHECK(back.window == 1);
    CHECK(back.cues == model.cues);
    CHECK(back.enc.corr_sign == model.enc.corr_sign);
    CHECK(back.enc.corr_value == model.enc.corr_value);
    for (std::size_t l = 0; l < 4; ++l) {
        CHECK(back.enc.layers[l].w_enc == model.enc.layers[l].w_enc);
        CHECK(back.enc.layers[l].w_dec == model.enc.layers[l].w_dec);
        CHECK(back.enc.layers[l].b_enc == model.enc.layers[l].b_enc);
        CHECK(back.enc.layers[l].b_dec == model.enc.layers[l].b_dec);
        CHECK(back2.enc.layers[l].w_enc == back.enc.layers[l].w_enc);
    }
    fs::remove(file);
}

TEST_CASE("inference rejects a dimension mismatch") {
    const Eigen::MatrixXd x = latent_samples(30, 1500, 66, 0.1);
    EncoderHyperparams hp;
    hp.epochs = 1;
    const StackedEncoder enc = train_stack(x, hp, 3);
    Eigen::MatrixXd wrong(29, 4);
    wrong.setZero();
    CHECK_THROWS_AS(infer_scalar(enc, wrong), ConfigError);
}

TEST_CASE("feature vectors follow the cue-major layout") {
    const int w = 5, h = 4;
    std::vector<CueMaps> maps(2);
    std::vector<FlowField> flow(2);
    for (int t = 0; t < 2; ++t) {
        maps[static_cast<std::size_t>(t)].pixel = cv::Mat1f(h, w);
        maps[static_cast<std::size_t>(t)].superpixel = cv::Mat1f(h, w);
        maps[static_cast<std::size_t>(t)].object = cv::Mat1f(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                maps[static_cast<std::size_t>(t)].pixel(y, x) = 100.f * t + 10.f * y + x;
                maps[static_cast<std::size_t>(t)].superpixel(y, x) = 1000.f + 10.f * y + x;
                maps[static_cast<std::size_t>(t)].object(y, x) = 2000.f + 10.f * y + x;
            }
        flow[static_cast<std::size_t>(t)].u = cv::Mat1f::zeros(h, w);
        flow[static_cast<std::size_t>(t)].v = cv::Mat1f::zeros(h, w);
    }
    flow[0].u.setTo(1.0f);  // everything moves one pixel right

    const std::array<bool, 3> all = {true, true, true};
    const Eigen::VectorXd v = assemble_features(maps, flow, 0, 2, 1, 1, all);
    REQUIRE(v.size() == 30);
    // Pixel cue, frame 0, (2,1): center then N, NE, E, SE, S, SW, W, NW.
    CHECK(v(0) == doctest::Approx(12.0));
    CHECK(v(1) == doctest::Approx(2.0));
    CHECK(v(2) == doctest::Approx(3.0));
    CHECK(v(3) == doctest::Approx(13.0));
    CHECK(v(4) == doctest::Approx(23.0));
    CHECK(v(5) == doctest::Approx(22.0));
    CHECK(v(6) == doctest::Approx(21.0));
    CHECK(v(7) == doctest::Approx(11.0));
    CHECK(v(8) == doctest::Approx(1.0));
    // Temporal entry follows the flow to (3,1) in frame 1.
    CHECK(v(9) == doctest::Approx(113.0));
    // Superpixel block starts at index 10.
    CHECK(v(10) == doctest::Approx(1012.0));
    CHECK(v(20) == doctest::Approx(2012.0));

    // Border clamping: NW of the origin is the origin itself.
    const Eigen::VectorXd o = assemble_features(maps, flow, 0, 0, 0, 1, all);
    CHECK(o(8) == doctest::Approx(0.0));
    CHECK(o(1) == doctest::Approx(0.0));

    // Disabled cues leave zero blocks.
    const std::array<bool, 3> only_sp = {false, true, false};
    const Eigen::VectorXd z = assemble_features(maps, flow, 0, 2, 1, 1, only_sp);
    CHECK(z(0) == 0.0);
    CHECK(z(9) == 0.0);
    CHECK(z(10) == doctest::Approx(1012.0));
    CHECK(z(20) == 0.0);

    // window = 0 packs nine entries per cue.
    const Eigen::VectorXd s = assemble_features(maps, flow, 0, 2, 1, 0, all);
    REQUIRE(s.size() == 27);
    CHECK(s(9) == doctest::Approx(1012.0));
}
