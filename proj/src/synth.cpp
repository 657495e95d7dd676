#include "vsod/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "vsod/dataset.hpp"
#include "vsod/encoder.hpp"

namespace fs = std::filesystem;

namespace vsod {

namespace {

struct Rgb {
    double r, g, b;
};

Rgb mix(const Rgb& a, const Rgb& b, double t) {
    return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

uchar clamp8(double v) { return static_cast<uchar>(std::lround(std::clamp(v, 0.0, 255.0))); }

void fill_rect(cv::Mat& img, const cv::Rect& r, const Rgb& c) {
    const cv::Rect clipped = r & cv::Rect(0, 0, img.cols, img.rows);
    for (int y = clipped.y; y < clipped.y + clipped.height; ++y)
        for (int x = clipped.x; x < clipped.x + clipped.width; ++x)
            img.at<cv::Vec3b>(y, x) = {clamp8(c.r), clamp8(c.g), clamp8(c.b)};
}

void write_frame_png(const cv::Mat& rgb, const fs::path& file) {
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    cv::imwrite(file.string(), bgr);
}

void write_meta(const fs::path& dir, const std::string& id, double fps) {
    std::ofstream out(dir / "meta.json");
    out << "{\"video_id\": \"" << id << "\", \"fps\": " << fps << "}\n";
}

// One reflecting step of an interval-constrained coordinate.
void bounce(double& p, double& v, double lo, double hi) {
    p += v;
    if (p < lo) {
        p = lo + (lo - p);
        v = -v;
    } else if (p > hi) {
        p = hi - (p - hi);
        v = -v;
    }
}

}  // namespace

void generate_suite(const fs::path& root, const SynthParams& params) {
    const int w = params.size.width, h = params.size.height;
    const int ow = std::max(8, static_cast<int>(std::lround(w * 0.375)));   // ~75 at 200
    const int oh = std::max(8, static_cast<int>(std::lround(h * 0.40)));    // ~45 at 112
    // Warm saturated tones, far from the cool sinusoidal background.
    const Rgb kObjectPalette[5] = {{235, 60, 50},
                                   {240, 150, 40},
                                   {220, 50, 160},
                                   {245, 215, 60},
                                   {235, 70, 130}};

    for (int v = 0; v < params.videos; ++v) {
        Rng rng(params.seed + 1000003ULL * static_cast<std::uint64_t>(v));
        char id[32];
        std::snprintf(id, sizeof(id), "video_%02d", v);
        const fs::path dir = root / id;
        fs::create_directories(dir / "frames");
        fs::create_directories(dir / "gt");

        const Rgb c0 = {30 + rng.range(0, 25), 70 + rng.range(0, 25), 110 + rng.range(0, 25)};
        const Rgb c1 = {60 + rng.range(0, 25), 105 + rng.range(0, 25), 80 + rng.range(0, 25)};
        const double fx = 1.5 + rng.range(0, 1.5), fy = 1.0 + rng.range(0, 1.0);
        const double phx = rng.range(0, 6.28), phy = rng.range(0, 6.28);
        const Rgb obj_color = kObjectPalette[v % 5];

        double px = rng.range(2, w - ow - 2.0);
        double py = rng.range(2, h - oh - 2.0);
        double vx = (rng.below(2) ? 1.0 : -1.0) * (2.0 + rng.range(0, 1.5));
        double vy = (rng.below(2) ? 1.0 : -1.0) * (1.2 + rng.range(0, 1.2));

        const int dw = w / 5, dh = h / 4;
        const cv::Rect distractor(static_cast<int>(rng.below(static_cast<std::uint64_t>(w - dw))),
                                  static_cast<int>(rng.below(static_cast<std::uint64_t>(h - dh))),
                                  dw, dh);
        // The distractor stays put and flickers: bright on even frames,
        // nearly background on odd ones. Frame-local cues fire on it;
        // only temporal agreement separates it from the moving object.
        const Rgb bg_mid = mix(c0, c1, 0.5);
        const Rgb dist_bright = mix(bg_mid, {255, 255, 255}, 0.32);
        const Rgb dist_dim = mix(bg_mid, {255, 255, 255}, 0.08);

        for (int t = 0; t < params.frames; ++t) {
            cv::Mat frame(h, w, CV_8UC3);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double s = 0.5 + 0.5 * std::sin(2 * CV_PI * fx * x / w + phx) *
                                               std::sin(2 * CV_PI * fy * y / h + phy);
                    const Rgb c = mix(c0, c1, s);
                    frame.at<cv::Vec3b>(y, x) = {clamp8(c.r), clamp8(c.g), clamp8(c.b)};
                }
            }
            fill_rect(frame, distractor, (t % 2 == 0) ? dist_bright : dist_dim);

            const cv::Rect obj(static_cast<int>(std::lround(px)),
                               static_cast<int>(std::lround(py)), ow, oh);
            fill_rect(frame, obj, obj_color);

            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    cv::Vec3b& p = frame.at<cv::Vec3b>(y, x);
                    for (int c = 0; c < 3; ++c)
                        p[c] = clamp8(p[c] + rng.range(-params.noise, params.noise));
                }
            }

            write_frame_png(frame, dir / "frames" / frame_name("frame_", t));

            if (t % params.keyframe_stride == 0) {
                cv::Mat1b mask = cv::Mat1b::zeros(h, w);
                mask(obj & cv::Rect(0, 0, w, h)).setTo(1);
                write_binary_mask(mask, dir / "gt" / frame_name("mask_", t));
            }

            bounce(px, vx, 1.0, static_cast<double>(w - ow - 1));
            bounce(py, vy, 1.0, static_cast<double>(h - oh - 1));
        }
        write_meta(dir, id, 30.0);
    }
}

void generate_annotate_fixture(const fs::path& root) {
    const int w = 120, h = 80, frames = 45;
    const fs::path dir = root / "toy_00";
    fs::create_directories(dir / "frames");
    fs::create_directories(dir / "objects");

    // Object 2 receives nearly all fixations. It is whole at frame 0,
    // gone at frame 15 (background-only discard) and split in two at
    // frame 30 (split discard).
    const cv::Rect r1(8, 8, 24, 20), r2(48, 30, 30, 24), r3(90, 52, 20, 18);
    const cv::Rect r2a(48, 30, 12, 24), r2b(66, 30, 12, 24);
    for (int t = 0; t < frames; ++t) {
        cv::Mat frame(h, w, CV_8UC3, cv::Scalar(90, 90, 90));
        fill_rect(frame, r1, {160, 120, 80});
        fill_rect(frame, r3, {80, 140, 170});
        if (t < 15) {
            fill_rect(frame, r2, {200, 70, 60});
        } else if (t >= 30) {
            fill_rect(frame, r2a, {200, 70, 60});
            fill_rect(frame, r2b, {200, 70, 60});
        }
        write_frame_png(frame, dir / "frames" / frame_name("frame_", t));

        if (t % 15 == 0) {
            cv::Mat1w labels = cv::Mat1w::zeros(h, w);
            labels(r1).setTo(1);
            labels(r3).setTo(3);
            if (t < 15) {
                labels(r2).setTo(2);
            } else if (t >= 30) {
                labels(r2a).setTo(2);
                labels(r2b).setTo(2);
            }
            write_label_map(labels, dir / "objects" / frame_name("mask_", t));
        }
    }

    std::ofstream fix(dir / "fixations.csv");
    fix << "x,y,t,subject\n";
    for (int i = 0; i < 40; ++i) {
        const double t = 0.02 + 0.028 * i;
        fix << (r2.x + 4 + (i * 7) % (r2.width - 8)) << ","
            << (r2.y + 4 + (i * 5) % (r2.height - 8)) << "," << t << "," << (i % 4) << "\n";
    }
    for (int i = 0; i < 4; ++i)
        fix << (r1.x + 6 + i) << "," << (r1.y + 6) << "," << (0.1 + 0.25 * i) << "," << (i % 2)
            << "\n";
    write_meta(dir, "toy_00", 30.0);
}

}  // namespace vsod
