#include "vsod/serialref.hpp"

#include <algorithm>
#include <cmath>

namespace vsod::serial {

namespace {

inline float srgb_linear(float c) {
    return c <= 0.04045f ? c / 12.92f : std::pow((c + 0.055f) / 1.055f, 2.4f);
}

inline float lab_f(float t) {
    return t > 0.008856f ? std::cbrt(t) : 7.787f * t + 16.0f / 116.0f;
}

}  // namespace

void to_lab(const cv::Mat& rgb, cv::Mat1f& l, cv::Mat1f& a, cv::Mat1f& b) {
    l.create(rgb.size());
    a.create(rgb.size());
    b.create(rgb.size());
    for (int y = 0; y < rgb.rows; ++y) {
        const cv::Vec3b* src = rgb.ptr<cv::Vec3b>(y);
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
            l(y, x) = 116.0f * fy - 16.0f;
            a(y, x) = 500.0f * (fx - fy);
            b(y, x) = 200.0f * (fy - fz);
        }
    }
}

void to_hsv(const cv::Mat& rgb, cv::Mat1f& h, cv::Mat1f& s, cv::Mat1f& v) {
    h.create(rgb.size());
    s.create(rgb.size());
    v.create(rgb.size());
    for (int y = 0; y < rgb.rows; ++y) {
        const cv::Vec3b* src = rgb.ptr<cv::Vec3b>(y);
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
            h(y, x) = hue;
            s(y, x) = mx > 0.0f ? d / mx : 0.0f;
            v(y, x) = mx;
        }
    }
}

cv::Mat1f to_gray(const cv::Mat& rgb) {
    cv::Mat1f out(rgb.size());
    for (int y = 0; y < rgb.rows; ++y) {
        const cv::Vec3b* src = rgb.ptr<cv::Vec3b>(y);
        for (int x = 0; x < rgb.cols; ++x)
            out(y, x) = 0.299f * src[x][0] + 0.587f * src[x][1] + 0.114f * src[x][2];
    }
    return out;
}

void hs_average(const cv::Mat1f& f, cv::Mat1f& out) {
    const int w = f.cols, h = f.rows;
    out.create(f.size());
    for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
            const float edge = f(ym, x) + f(yp, x) + f(y, xm) + f(y, xp);
            const float corner = f(ym, xm) + f(ym, xp) + f(yp, xm) + f(yp, xp);
            out(y, x) = edge / 6.0f + corner / 12.0f;
        }
    }
}

cv::Mat1f warp_bilinear(const cv::Mat1f& img, const cv::Mat1f& u, const cv::Mat1f& v) {
    const int w = img.cols, h = img.rows;
    cv::Mat1f out(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float sx = std::clamp(x + u(y, x), 0.0f, w - 1.0f);
            const float sy = std::clamp(y + v(y, x), 0.0f, h - 1.0f);
            const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
            const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
            const float fx = sx - x0, fy = sy - y0;
            out(y, x) = (1 - fy) * ((1 - fx) * img(y0, x0) + fx * img(y0, x1)) +
                        fy * ((1 - fx) * img(y1, x0) + fx * img(y1, x1));
        }
    }
    return out;
}

}  // namespace vsod::serial
