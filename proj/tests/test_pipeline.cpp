#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include <opencv2/imgproc.hpp>

#include "test_support.hpp"
#include "vsod/pipeline.hpp"
#include "vsod/synth.hpp"

using namespace vsod;

TEST_CASE("defaults survive an empty path") {
    const PipelineConfig cfg = load_config("");
    CHECK(cfg.max_side == 400);
    CHECK(cfg.window == 1);
    CHECK(cfg.obj_k == 50);
    CHECK(cfg.obj_provider == "builtin");
    CHECK(cfg.cues[kCuePixel]);
    CHECK(cfg.cues[kCueSuperpixel]);
    CHECK(cfg.cues[kCueObject]);
    CHECK(cfg.train_seed == 1);
    CHECK(cfg.post.sigmoid_slope == doctest::Approx(10.0));
}

TEST_CASE("a config file overlays the defaults") {
    testsupport::TempDir tmp("vsod_cfg");
    const auto file = tmp.path / "pipeline.json";
    std::ofstream(file) << R"({
        "mbd": {"passes": 5},
        "sp": {"n": 150},
        "window": {"w": 2},
        "cues": {"enabled": ["pixel", "object"]},
        "train": {"seed": 99, "epochs": 7}
    })";
    const PipelineConfig cfg = load_config(file);
    CHECK(cfg.mbd.mbd_passes == 5);
    CHECK(cfg.sp.slic.n_target == 150);
    CHECK(cfg.window == 2);
    CHECK(cfg.cues[kCuePixel]);
    CHECK_FALSE(cfg.cues[kCueSuperpixel]);
    CHECK(cfg.cues[kCueObject]);
    CHECK(cfg.train_seed == 99);
    CHECK(cfg.train.epochs == 7);
    CHECK(cfg.max_side == 400);
}

TEST_CASE("unknown keys and malformed values are config errors") {
    testsupport::TempDir tmp("vsod_cfg_bad");
    const auto file = tmp.path / "bad.json";
    std::ofstream(file) << R"({"mbd": {"bogus": 1}})";
    CHECK_THROWS_AS(load_config(file), ConfigError);
    CHECK_THROWS_AS(load_config(tmp.path / "missing.json"), ConfigError);
    std::ofstream(tmp.path / "broken.json") << "{not json";
    CHECK_THROWS_AS(load_config(tmp.path / "broken.json"), ConfigError);

    PipelineConfig cfg;
    CHECK_THROWS_AS(apply_override(cfg, "no.such.key", "1"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "mbd.passes", "three"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "obj.provider", "neither"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "cues.enabled", "pixel,ghost"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "cues.enabled", ""), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "resize.max_side", "0"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "window.w", "-1"), ConfigError);

    try {
        apply_override(cfg, "mbd.bogus", "1");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("mbd.bogus") != std::string::npos);
    }
}

TEST_CASE("string overrides reach every section") {
    PipelineConfig cfg;
    apply_override(cfg, "resize.max_side", "256");
    apply_override(cfg, "flow.alpha", "0.02");
    apply_override(cfg, "flow.iters", "40");
    apply_override(cfg, "features.signed_flow", "true");
    apply_override(cfg, "mbd.gamma", "0.7");
    apply_override(cfg, "sp.compactness", "12.5");
    apply_override(cfg, "smd.lambda", "0.2");
    apply_override(cfg, "obj.k", "20");
    apply_override(cfg, "obj.provider", "files");
    apply_override(cfg, "train.n_samples", "1234");
    apply_override(cfg, "train.seed", "42");
    apply_override(cfg, "post.sigmoid_center", "0.4");
    apply_override(cfg, "window.w", "0");
    apply_override(cfg, "cues.enabled", "superpixel");
    apply_override(cfg, "annotate.sigma_t", "0.2");

    CHECK(cfg.max_side == 256);
    CHECK(cfg.flow.alpha == doctest::Approx(0.02));
    CHECK(cfg.flow.iterations == 40);
    CHECK(cfg.features.signed_flow);
    CHECK(cfg.mbd.smooth_gamma == doctest::Approx(0.7));
    CHECK(cfg.sp.slic.compactness == doctest::Approx(12.5));
    CHECK(cfg.sp.smd.lambda == doctest::Approx(0.2));
    CHECK(cfg.obj_k == 20);
    CHECK(cfg.obj_provider == "files");
    CHECK(cfg.train_n_samples == 1234);
    CHECK(cfg.train_seed == 42);
    CHECK(cfg.post.sigmoid_center == doctest::Approx(0.4));
    CHECK(cfg.window == 0);
    CHECK_FALSE(cfg.cues[kCuePixel]);
    CHECK(cfg.cues[kCueSuperpixel]);
    CHECK_FALSE(cfg.cues[kCueObject]);
    CHECK(cfg.density.sigma_t == doctest::Approx(0.2));
}

TEST_CASE("the config snapshot round-trips through a file") {
    PipelineConfig cfg;
    apply_override(cfg, "mbd.passes", "4");
    apply_override(cfg, "cues.enabled", "pixel,object");
    apply_override(cfg, "train.seed", "777");
    const std::string dump = config_json(cfg).dump(2);

    testsupport::TempDir tmp("vsod_cfg_rt");
    std::ofstream(tmp.path / "snap.json") << dump;
    const PipelineConfig back = load_config(tmp.path / "snap.json");
    CHECK(config_json(back).dump(2) == dump);
    CHECK(fnv1a64_hex(config_json(back).dump()) == fnv1a64_hex(config_json(cfg).dump()));
}

TEST_CASE("stage times accumulate and report per-frame shares") {
    StageTimes a, b;
    a.optical_flow = 2.0;
    a.pixel = 1.0;
    a.total = 3.0;
    a.frames = 10;
    b.optical_flow = 1.0;
    b.superpixel = 0.5;
    b.total = 1.5;
    b.frames = 10;
    a.add(b);
    CHECK(a.frames == 20);
    const nlohmann::json j = a.per_frame_json();
    CHECK(j["frames"] == 20);
    CHECK(j["optical_flow"] == doctest::Approx(0.15));
    CHECK(j["superpixel"] == doctest::Approx(0.025));
    CHECK(j["total"] == doctest::Approx(0.225));
    CHECK(j.contains("object_proposal"));
    CHECK(j.contains("object"));
    CHECK(j.contains("encode_post"));
}

namespace {

FrameSequence tiny_sequence(int frames, cv::Size size) {
    FrameSequence seq;
    seq.video_id = "tiny";
    seq.fps = 30.0;
    seq.original_size = size;
    Rng rng(5);
    for (int t = 0; t < frames; ++t) {
        cv::Mat f(size, CV_8UC3);
        for (int y = 0; y < size.height; ++y)
            for (int x = 0; x < size.width; ++x)
                f.at<cv::Vec3b>(y, x) = {static_cast<uchar>(40 + rng.below(30)),
                                         static_cast<uchar>(90 + rng.below(30)),
                                         static_cast<uchar>(140 + rng.below(30))};
        const int ox = 4 + 3 * t;
        cv::rectangle(f, cv::Rect(ox, 6, 12, 10), cv::Scalar(230, 60, 50), cv::FILLED);
        seq.frames.push_back(f);
    }
    return seq;
}

}  // namespace

TEST_CASE("cue extraction honors the enabled set and bounds") {
    PipelineConfig cfg;
    cfg.sp.slic.n_target = 40;
    cfg.cues = {true, false, true};
    const FrameSequence seq = tiny_sequence(3, {48, 32});
    const VideoArtifacts va = extract_cues(seq, cfg, "");
    REQUIRE(va.frames == 3);
    REQUIRE(va.cues.size() == 3);
    REQUIRE(va.flow.size() == 3);
    CHECK(va.size == cv::Size(48, 32));

    for (const auto& cm : va.cues) {
        CHECK(cv::countNonZero(cm.superpixel) == 0);
        double lo, hi;
        cv::minMaxLoc(cm.pixel, &lo, &hi);
        CHECK(lo >= 0.0);
        CHECK(hi <= 1.0);
        cv::minMaxLoc(cm.object, &lo, &hi);
        CHECK(lo >= 0.0);
        CHECK(hi <= 1.0);
    }
    CHECK_THROWS_AS(extract_cues(FrameSequence{}, cfg, ""), DataError);
}

TEST_CASE("assembled frames have one column per pixel") {
    PipelineConfig cfg;
    cfg.sp.slic.n_target = 40;
    const FrameSequence seq = tiny_sequence(2, {32, 24});
    const VideoArtifacts va = extract_cues(seq, cfg, "");
    const Eigen::MatrixXd x1 = assemble_frame(va, 0, 1, {true, true, true});
    CHECK(x1.rows() == 30);
    CHECK(x1.cols() == 32 * 24);
    const Eigen::MatrixXd x0 = assemble_frame(va, 1, 0, {true, true, true});
    CHECK(x0.rows() == 27);
    CHECK(x0.cols() == 32 * 24);
    CHECK(x1.minCoeff() >= 0.0);
    CHECK(x1.maxCoeff() <= 1.0);
}

#ifdef VSOD_CLI_PATH

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(VSOD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("exit codes distinguish config and data errors") {
    testsupport::TempDir tmp("vsod_cli");
    CHECK(run_cli("stats --dataset " + (tmp.path / "nowhere").string()) == 2);
    CHECK(run_cli("stats --dataset " + tmp.path.string() + " --set bad.key=1") == 1);
    CHECK(run_cli("eval --gt " + tmp.path.string() + " --pred " + tmp.path.string() +
                  " --out " + (tmp.path / "r.json").string()) == 2);

    const auto vid = tmp.path / "data" / "vid_00";
    std::filesystem::create_directories(vid / "gt");
    std::filesystem::create_directories(vid / "frames");
    cv::Mat1b m = cv::Mat1b::zeros(12, 16);
    m(cv::Rect(4, 4, 6, 5)).setTo(1);
    write_binary_mask(m, vid / "gt" / "mask_000000.png");
    CHECK(run_cli("stats --dataset " + (tmp.path / "data").string() + " --out " +
                  (tmp.path / "stats.json").string()) == 0);
    CHECK(std::filesystem::exists(tmp.path / "stats.json"));
}

#endif
