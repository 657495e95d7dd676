#include "vsod/features.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

namespace vsod {

namespace {

inline float srgb_linear(float c) {
    return c <= 0.04045f ? c / 12.92f : std::pow((c + 0.055f) / 1.055f, 2.4f);
}

inline float lab_f(float t) {
    return t > 0.008856f ? std::cbrt(t) : 7.787f * t + 16.0f / 116.0f;
}

}  // namespace

const char* channel_name(int c) {
    static const char* names[kChannelCount] = {"R", "G", "B", "L", "a", "b",
                                               "H", "S", "V", "X", "Y", "T"};
    return names[c];
}

void to_lab(const cv::Mat& rgb, cv::Mat1f& l, cv::Mat1f& a, cv::Mat1f& b) {
    CV_Assert(rgb.type() == CV_8UC3);
    l.create(rgb.size());
    a.create(rgb.size());
    b.create(rgb.size());
    parallel_for(0, rgb.rows, [&](int y) {
        const cv::Vec3b* src = rgb.ptr<cv::Vec3b>(y);
        float* lr = l.ptr<float>(y);
        float* ar = a.ptr<float>(y);
        float* br = b.ptr<float>(y);
        for (int x = 0; x < rgb.cols; ++x) {
            const float r = srgb_linear(src[x][0] / 255.0f);
            const float g = srgb_linear(src[x][1] / 255.0f);
            const float bl = srgb_linear(src[x][2] / 255.0f);
            const float X = 0.4124564f * r + 0.3575761f * g + 0.1804375f * bl;
            const float Y = 0.2126729f * r + 0.7151522f * g + 0.0721750f * bl;
            const float Z = 0.0193339f * r + 0.1191920f * g + 0.9503041f * bl;
            const float fx = lab_f(X / 0.95047f);
            const float fy = lab_f(Y);
            const float fz = lab_f(Z / 1.08883f);
            lr[x] = 116.0f * fy - 16.0f;
            ar[x] = 500.0f * (fx - fy);
            br[x] = 200.0f * (fy - fz);
        }
    });
}

void to_hsv(const cv::Mat& rgb, cv::Mat1f& h, cv::Mat1f& s, cv::Mat1f& v) {
    CV_Assert(rgb.type() == CV_8UC3);
    h.create(rgb.size());
    s.create(rgb.size());
    v.create(rgb.size());
    parallel_for(0, rgb.rows, [&](int y) {
        const cv::Vec3b* src = rgb.ptr<cv::Vec3b>(y);
        float* hr = h.ptr<float>(y);
        float* sr = s.ptr<float>(y);
        float* vr = v.ptr<float>(y);
        for (int x = 0; x < rgb.cols; ++x) {
            const float r = src[x][0] / 255.0f;
            const float g = src[x][1] / 255.0f;
            const float bl = src[x][2] / 255.0f;
            const float mx = std::max({r, g, bl});
            const float mn = std::min({r, g, bl});
            const float d = mx - mn;
            float hue = 0.0f;
            if (d > 0.0f) {
                if (mx == r)
                    hue = 60.0f * ((g - bl) / d);
                else if (mx == g)
                    hue = 60.0f * ((bl - r) / d + 2.0f);
                else
                    hue = 60.0f * ((r - g) / d + 4.0f);
                if (hue < 0.0f) hue += 360.0f;
            }
            hr[x] = hue;
            sr[x] = mx > 0.0f ? d / mx : 0.0f;
            vr[x] = mx;
        }
    });
}

cv::Mat1f to_gray(const cv::Mat& rgb) {
    CV_Assert(rgb.type() == CV_8UC3);
    cv::Mat1f out(rgb.size());
    parallel_for(0, rgb.rows, [&](int y) {
        const cv::Vec3b* src = rgb.ptr<cv::Vec3b>(y);
        float* dst = out.ptr<float>(y);
        for (int x = 0; x < rgb.cols; ++x)
            dst[x] = 0.299f * src[x][0] + 0.587f * src[x][1] + 0.114f * src[x][2];
    });
    return out;
}

void hs_average(const cv::Mat1f& f, cv::Mat1f& out) {
    const int w = f.cols, h = f.rows;
    out.create(f.size());
    parallel_for(0, h, [&](int y) {
        const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
            const float edge = f(ym, x) + f(yp, x) + f(y, xm) + f(y, xp);
            const float corner = f(ym, xm) + f(ym, xp) + f(yp, xm) + f(yp, xp);
            out(y, x) = edge / 6.0f + corner / 12.0f;
        }
    });
}

namespace {

void central_diff(const cv::Mat1f& img, cv::Mat1f& dx, cv::Mat1f& dy) {
    const int w = img.cols, h = img.rows;
    dx.create(img.size());
    dy.create(img.size());
    parallel_for(0, h, [&](int y) {
        const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
            dx(y, x) = 0.5f * (img(y, xp) - img(y, xm));
            dy(y, x) = 0.5f * (img(yp, x) - img(ym, x));
        }
    });
}

}  // namespace

cv::Mat1f warp_bilinear(const cv::Mat1f& img, const cv::Mat1f& u, const cv::Mat1f& v) {
    const int w = img.cols, h = img.rows;
    cv::Mat1f out(img.size());
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const float sx = std::clamp(x + u(y, x), 0.0f, w - 1.0f);
            const float sy = std::clamp(y + v(y, x), 0.0f, h - 1.0f);
            const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
            const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
            const float fx = sx - x0, fy = sy - y0;
            out(y, x) = (1 - fy) * ((1 - fx) * img(y0, x0) + fx * img(y0, x1)) +
                        fy * ((1 - fx) * img(y1, x0) + fx * img(y1, x1));
        }
    });
    return out;
}

FlowField HornSchunckFlow::compute(const cv::Mat1f& prev, const cv::Mat1f& next) const {
    CV_Assert(prev.size() == next.size());

    std::vector<cv::Mat1f> p1{prev}, p2{next};
    for (int l = 1; l < params_.levels; ++l) {
        const cv::Size half((p1.back().cols + 1) / 2, (p1.back().rows + 1) / 2);
        if (std::min(half.width, half.height) < 8) break;
        cv::Mat1f a, b;
        cv::pyrDown(p1.back(), a, half);
        cv::pyrDown(p2.back(), b, half);
        p1.push_back(a);
        p2.push_back(b);
    }

    cv::Mat1f u = cv::Mat1f::zeros(p1.back().size());
    cv::Mat1f v = cv::Mat1f::zeros(p1.back().size());
    const float alpha2 = static_cast<float>(params_.alpha * params_.alpha);

    for (int level = static_cast<int>(p1.size()) - 1; level >= 0; --level) {
        const cv::Mat1f& i1 = p1[level];
        if (u.size() != i1.size()) {
            cv::Mat1f u2, v2;
            cv::resize(u, u2, i1.size(), 0, 0, cv::INTER_LINEAR);
            cv::resize(v, v2, i1.size(), 0, 0, cv::INTER_LINEAR);
            u2 *= static_cast<float>(i1.cols) / u.cols;
            v2 *= static_cast<float>(i1.rows) / u.rows;
            u = u2;
            v = v2;
        }

        const cv::Mat1f i2w = warp_bilinear(p2[level], u, v);
        cv::Mat1f dx1, dy1, dx2, dy2;
        central_diff(i1, dx1, dy1);
        central_diff(i2w, dx2, dy2);
        cv::Mat1f ix = 0.5f * (dx1 + dx2);
        cv::Mat1f iy = 0.5f * (dy1 + dy2);
        cv::Mat1f it = i2w - i1;

        cv::Mat1f du = cv::Mat1f::zeros(i1.size());
        cv::Mat1f dv = cv::Mat1f::zeros(i1.size());
        cv::Mat1f dun(i1.size()), dvn(i1.size()), dub, dvb;

        for (int iter = 0; iter < params_.iterations; ++iter) {
            hs_average(du, dub);
            hs_average(dv, dvb);
            parallel_for(0, i1.rows, [&](int y) {
                for (int x = 0; x < i1.cols; ++x) {
                    const float gx = ix(y, x), gy = iy(y, x);
                    const float frac = (gx * dub(y, x) + gy * dvb(y, x) + it(y, x)) /
                                       (alpha2 + gx * gx + gy * gy);
                    dun(y, x) = dub(y, x) - gx * frac;
                    dvn(y, x) = dvb(y, x) - gy * frac;
                }
            });
            std::swap(du, dun);
            std::swap(dv, dvn);
        }
        u += du;
        v += dv;
    }
    return {u, v};
}

std::vector<FlowField> compute_flow(const FrameSequence& seq, const FlowEstimator& est) {
    const int n = static_cast<int>(seq.frames.size());
    std::vector<cv::Mat1f> gray(n);
    for (int t = 0; t < n; ++t) gray[t] = to_gray(seq.frames[t]);

    std::vector<FlowField> flow(n);
    for (int t = 0; t + 1 < n; ++t) flow[t] = est.compute(gray[t], gray[t + 1]);
    if (n >= 1) {
        flow[n - 1].u = cv::Mat1f::zeros(seq.frames[0].size());
        flow[n - 1].v = cv::Mat1f::zeros(seq.frames[0].size());
    }
    return flow;
}

cv::Mat1f compute_flicker(const cv::Mat1f& l_cur, const cv::Mat1f& l_prev) {
    CV_Assert(l_cur.size() == l_prev.size());
    cv::Mat1f out(l_cur.size());
    parallel_for(0, l_cur.rows, [&](int y) {
        for (int x = 0; x < l_cur.cols; ++x)
            out(y, x) = std::abs(l_cur(y, x) - l_prev(y, x));
    });
    return out;
}

ChannelStack compute_channels(const FrameSequence& seq, const std::vector<FlowField>& flow,
                              const ChannelParams& params) {
    const int n = static_cast<int>(seq.frames.size());
    CV_Assert(static_cast<int>(flow.size()) == n);

    ChannelStack stack;
    stack.frames.resize(n);
    cv::Mat1f prev_l;

    for (int t = 0; t < n; ++t) {
        const cv::Mat& rgb = seq.frames[t];
        auto& ch = stack.frames[t];
        for (int c = 0; c < kChannelCount; ++c) ch[c].create(rgb.size());

        cv::Mat1f l, a, b, h, s, v;
        to_lab(rgb, l, a, b);
        to_hsv(rgb, h, s, v);

        parallel_for(0, rgb.rows, [&](int y) {
            const cv::Vec3b* src = rgb.ptr<cv::Vec3b>(y);
            for (int x = 0; x < rgb.cols; ++x) {
                ch[kChR](y, x) = src[x][0] / 255.0f;
                ch[kChG](y, x) = src[x][1] / 255.0f;
                ch[kChB](y, x) = src[x][2] / 255.0f;
                ch[kChL](y, x) = l(y, x) / 100.0f;
                ch[kChA](y, x) = (a(y, x) + 128.0f) / 255.0f;
                ch[kChBb](y, x) = (b(y, x) + 128.0f) / 255.0f;
                ch[kChH](y, x) = h(y, x) / 360.0f;
                ch[kChS](y, x) = s(y, x);
                ch[kChV](y, x) = v(y, x);
            }
        });

        if (params.signed_flow) {
            ch[kChX] = rescale_unit(flow[t].u);
            ch[kChY] = rescale_unit(flow[t].v);
        } else {
            ch[kChX] = rescale_unit(cv::abs(flow[t].u));
            ch[kChY] = rescale_unit(cv::abs(flow[t].v));
        }

        ch[kChT] = (t == 0) ? cv::Mat1f::zeros(rgb.size())
                            : compute_flicker(ch[kChL], prev_l);
        prev_l = ch[kChL];
    }
    return stack;
}

}  // namespace vsod
