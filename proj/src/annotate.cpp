#include "vsod/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <opencv2/imgproc.hpp>

namespace vsod {

cv::Mat1f density_raster(const FixationLog& fixations, double t, cv::Size size,
                         const DensityParams& params) {
    const double sigma_s = params.sigma_s_frac * std::max(size.width, size.height);
    const double inv2ss = 1.0 / (2.0 * sigma_s * sigma_s);
    const double inv2st = 1.0 / (2.0 * params.sigma_t * params.sigma_t);
    const double cutoff = params.temporal_cutoff * params.sigma_t;

    std::vector<const Fixation*> active;
    for (const auto& f : fixations.records)
        if (f.t > t && f.t - t <= cutoff) active.push_back(&f);

    cv::Mat1f out = cv::Mat1f::zeros(size);
    parallel_for(0, size.height, [&](int y) {
        for (int x = 0; x < size.width; ++x) {
            double acc = 0.0;
            for (const Fixation* f : active) {
                const double dx = f->x - x, dy = f->y - y, dt = f->t - t;
                acc += std::exp(-(dx * dx + dy * dy) * inv2ss) * std::exp(-dt * dt * inv2st);
            }
            out(y, x) = static_cast<float>(acc);
        }
    });
    return out;
}

double fixation_density(const cv::Mat1b& mask, double t, const FixationLog& fixations,
                        cv::Size size, const DensityParams& params) {
    CV_Assert(mask.size() == size);
    const int count = cv::countNonZero(mask);
    if (count == 0) throw DataError("fixation density of an empty mask");

    const cv::Mat1f d = density_raster(fixations, t, size, params);
    double sum = 0.0;
    for (int y = 0; y < size.height; ++y)
        for (int x = 0; x < size.width; ++x)
            if (mask(y, x)) sum += d(y, x);
    return sum / count;
}

std::vector<ObjectScore> score_objects(const ObjectMaskSet& masks, const FixationLog& fixations,
                                       double fps, cv::Size size, const DensityParams& params) {
    if (masks.keyframes.empty()) throw DataError("no keyframes to score");

    std::map<int, ObjectScore> by_label;
    for (const auto& kf : masks.keyframes) {
        const double t = kf.frame_index / fps;
        const cv::Mat1f d = density_raster(fixations, t, size, params);

        std::map<int, std::pair<double, int>> sums;  // label -> (density sum, pixels)
        for (int y = 0; y < kf.labels.rows; ++y)
            for (int x = 0; x < kf.labels.cols; ++x) {
                const int label = kf.labels(y, x);
                if (label == 0) continue;
                auto& s = sums[label];
                s.first += d(y, x);
                ++s.second;
            }
        for (const auto& [label, s] : sums) {
            ObjectScore& score = by_label[label];
            score.label = label;
            score.per_keyframe.emplace_back(kf.frame_index, s.first / s.second);
        }
    }

    std::vector<ObjectScore> out;
    for (auto& [label, score] : by_label) {
        double sum = 0.0;
        for (const auto& [frame, v] : score.per_keyframe) sum += v;
        score.video_score = sum / score.per_keyframe.size();
        out.push_back(std::move(score));
    }
    return out;
}

std::vector<int> select_salient(const std::vector<ObjectScore>& scores,
                                const DensityParams& params) {
    std::vector<int> selected;
    for (const auto& s : scores)
        if (s.video_score >= params.score_threshold) selected.push_back(s.label);
    if (!selected.empty()) {
        std::sort(selected.begin(), selected.end());
        return selected;
    }

    int best_label = 0;
    double best = -1.0;
    for (const auto& s : scores)
        if (s.video_score > best || (s.video_score == best && s.label < best_label)) {
            best = s.video_score;
            best_label = s.label;
        }
    if (best < 0.0) return {};
    return {best_label};
}

namespace {

int component_count(const cv::Mat1b& mask) {
    cv::Mat1i cc;
    return cv::connectedComponents(mask, cc, 4, CV_32S) - 1;
}

}  // namespace

GtEmission emit_gt_masks(const ObjectMaskSet& masks, const std::vector<int>& salient) {
    const std::set<int> wanted(salient.begin(), salient.end());
    GtEmission out;

    for (const auto& kf : masks.keyframes) {
        cv::Mat1b unioned = cv::Mat1b::zeros(kf.labels.size());
        std::set<int> present;
        for (int y = 0; y < kf.labels.rows; ++y)
            for (int x = 0; x < kf.labels.cols; ++x) {
                const int label = kf.labels(y, x);
                if (label > 0 && wanted.count(label)) {
                    unioned(y, x) = 255;
                    present.insert(label);
                }
            }

        if (present.empty()) {
            out.discards.push_back({kf.frame_index, "background-only"});
            continue;
        }

        bool split = false;
        for (int label : present) {
            cv::Mat1b single(kf.labels.size());
            for (int y = 0; y < kf.labels.rows; ++y)
                for (int x = 0; x < kf.labels.cols; ++x)
                    single(y, x) = kf.labels(y, x) == label ? 255 : 0;
            if (component_count(single) > 1) {
                split = true;
                break;
            }
        }
        if (split) {
            out.discards.push_back({kf.frame_index, "split"});
            continue;
        }

        MaskKeyframe m;
        m.frame_index = kf.frame_index;
        m.labels.create(kf.labels.size());
        for (int y = 0; y < kf.labels.rows; ++y)
            for (int x = 0; x < kf.labels.cols; ++x) m.labels(y, x) = unioned(y, x) ? 1 : 0;
        out.masks.push_back(std::move(m));
    }
    return out;
}

cv::Mat1f average_annotation_map(const std::vector<std::vector<cv::Mat1b>>& videos,
                                 cv::Size out_size) {
    cv::Mat1f total = cv::Mat1f::zeros(out_size);
    bool any = false;

    for (const auto& masks : videos) {
        if (masks.empty()) continue;
        cv::Mat1f acc = cv::Mat1f::zeros(out_size);
        for (const auto& mask : masks) {
            cv::Mat1f m(mask.size());
            for (int y = 0; y < mask.rows; ++y)
                for (int x = 0; x < mask.cols; ++x) m(y, x) = mask(y, x) ? 1.0f : 0.0f;
            if (m.size() != out_size) {
                cv::Mat1f resized;
                cv::resize(m, resized, out_size, 0, 0, cv::INTER_LINEAR);
                m = resized;
            }
            acc += m;
        }
        double lo, hi;
        cv::minMaxLoc(acc, &lo, &hi);
        if (hi > 0) acc *= static_cast<float>(1.0 / hi);
        total += acc;
        any = true;
    }
    if (!any) throw DataError("no masks for the average annotation map");

    double lo, hi;
    cv::minMaxLoc(total, &lo, &hi);
    if (hi > 0) total *= static_cast<float>(1.0 / hi);
    return total;
}

DatasetStats dataset_stats(const std::vector<std::vector<cv::Mat1b>>& videos) {
    DatasetStats stats;
    std::vector<double> counts, areas;

    for (const auto& masks : videos)
        for (const auto& mask : masks) {
            counts.push_back(component_count(mask));
            areas.push_back(100.0 * cv::countNonZero(mask) / (mask.rows * mask.cols));
        }
    stats.keyframes = static_cast<int>(counts.size());
    if (stats.keyframes == 0) return stats;

    auto mean_std = [](const std::vector<double>& v) {
        double mean = 0;
        for (double x : v) mean += x;
        mean /= v.size();
        double var = 0;
        for (double x : v) var += (x - mean) * (x - mean);
        return std::make_pair(mean, std::sqrt(var / v.size()));
    };
    std::tie(stats.obj_count_mean, stats.obj_count_std) = mean_std(counts);
    std::tie(stats.area_mean, stats.area_std) = mean_std(areas);
    return stats;
}

}  // namespace vsod
