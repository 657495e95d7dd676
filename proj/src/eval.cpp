#include "vsod/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <opencv2/imgproc.hpp>

#include <nlohmann/json.hpp>

#include "vsod/dataset.hpp"

namespace fs = std::filesystem;

namespace vsod {

cv::Mat1b adaptive_threshold(const cv::Mat1f& s) {
    double lo, hi;
    cv::minMaxLoc(s, &lo, &hi);
    const double tau = std::min(2.0 * cv::mean(s)[0], hi);
    cv::Mat1b mask(s.size());
    for (int y = 0; y < s.rows; ++y)
        for (int x = 0; x < s.cols; ++x) mask(y, x) = s(y, x) >= tau ? 255 : 0;
    return mask;
}

std::pair<double, double> precision_recall(const cv::Mat1b& m, const cv::Mat1b& g) {
    CV_Assert(m.size() == g.size());
    long inter = 0, msum = 0, gsum = 0;
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) {
            const bool pm = m(y, x) != 0, pg = g(y, x) != 0;
            inter += pm && pg;
            msum += pm;
            gsum += pg;
        }
    const double precision = msum > 0 ? static_cast<double>(inter) / msum : 0.0;
    const double recall = gsum > 0 ? static_cast<double>(inter) / gsum : 0.0;
    return {precision, recall};
}

double mae(const cv::Mat1f& s, const cv::Mat1b& g) {
    CV_Assert(s.size() == g.size());
    double sum = 0.0;
    for (int y = 0; y < s.rows; ++y)
        for (int x = 0; x < s.cols; ++x)
            sum += std::abs(s(y, x) - (g(y, x) ? 1.0 : 0.0));
    return sum / (static_cast<double>(s.rows) * s.cols);
}

double f_beta(double precision, double recall, double beta2) {
    const double denom = beta2 * precision + recall;
    if (denom <= 0.0) return 0.0;
    return (1.0 + beta2) * precision * recall / denom;
}

EvalReport aggregate(const std::vector<KeyframeScore>& scores, double beta2) {
    EvalReport report;
    report.beta2 = beta2;

    std::vector<std::string> order;
    std::map<std::string, VideoScore> videos;
    for (const auto& s : scores) {
        auto it = videos.find(s.video_id);
        if (it == videos.end()) {
            order.push_back(s.video_id);
            it = videos.emplace(s.video_id, VideoScore{s.video_id, 0, 0, 0, 0}).first;
        }
        it->second.map += s.precision;
        it->second.mar += s.recall;
        it->second.mae += s.mae;
        ++it->second.n;
    }

    for (const auto& id : order) {
        VideoScore v = videos[id];
        v.map /= v.n;
        v.mar /= v.n;
        v.mae /= v.n;
        report.per_video.push_back(v);
        report.map += v.map;
        report.mar += v.mar;
        report.mae += v.mae;
    }
    const int nv = static_cast<int>(report.per_video.size());
    if (nv > 0) {
        report.map /= nv;
        report.mar /= nv;
        report.mae /= nv;
    }
    report.f_beta = f_beta(report.map, report.mar, beta2);
    return report;
}

namespace {

std::vector<std::pair<std::string, fs::path>> gt_videos(const fs::path& gt_root) {
    std::vector<std::pair<std::string, fs::path>> out;
    if (!fs::is_directory(gt_root))
        throw DataError("ground-truth root not found: " + gt_root.string());
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(gt_root))
        if (e.is_directory()) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        if (fs::is_directory(dir / "gt"))
            out.emplace_back(dir.filename().string(), dir / "gt");
        else
            out.emplace_back(dir.filename().string(), dir);
    }
    return out;
}

}  // namespace

EvalReport evaluate_directories(const fs::path& gt_root, const fs::path& pred_root, double beta2,
                                std::vector<CurvePoint>* curves) {
    std::vector<KeyframeScore> scores;
    std::map<std::string, std::vector<std::array<double, 512>>> curve_acc;

    bool any_gt = false;
    for (const auto& [video_id, gt_dir] : gt_videos(gt_root)) {
        const auto masks = load_binary_masks(gt_dir);
        if (masks.empty()) continue;
        any_gt = true;

        for (const auto& kf : masks) {
            cv::Mat1b g(kf.labels.size());
            int fg = 0;
            for (int y = 0; y < g.rows; ++y)
                for (int x = 0; x < g.cols; ++x) {
                    g(y, x) = kf.labels(y, x) ? 255 : 0;
                    fg += g(y, x) != 0;
                }
            if (fg == 0) continue;

            const fs::path pred_file =
                pred_root / video_id / frame_name("sal_", kf.frame_index);
            if (!fs::exists(pred_file))
                throw DataError("missing prediction " + pred_file.string());
            cv::Mat1f s = load_saliency_map(pred_file);
            if (s.size() != g.size()) {
                cv::Mat1f resized;
                cv::resize(s, resized, g.size(), 0, 0, cv::INTER_LINEAR);
                s = resized;
            }

            KeyframeScore ks;
            ks.video_id = video_id;
            const auto pr = precision_recall(adaptive_threshold(s), g);
            ks.precision = pr.first;
            ks.recall = pr.second;
            ks.mae = mae(s, g);
            scores.push_back(ks);

            if (curves) {
                auto& acc = curve_acc[video_id];
                acc.emplace_back();
                auto& row = acc.back();
                for (int i = 0; i < 256; ++i) {
                    const float tau = i / 255.0f;
                    cv::Mat1b m(s.size());
                    for (int y = 0; y < s.rows; ++y)
                        for (int x = 0; x < s.cols; ++x) m(y, x) = s(y, x) >= tau ? 255 : 0;
                    const auto c = precision_recall(m, g);
                    row[i] = c.first;
                    row[256 + i] = c.second;
                }
            }
        }
    }
    if (!any_gt) throw DataError("no ground-truth masks under " + gt_root.string());
    if (scores.empty()) throw DataError("no scorable keyframes under " + gt_root.string());

    if (curves) {
        for (const auto& [video_id, rows] : curve_acc) {
            for (int i = 0; i < 256; ++i) {
                CurvePoint p;
                p.video_id = video_id;
                p.threshold = i / 255.0;
                for (const auto& row : rows) {
                    p.precision += row[i];
                    p.recall += row[256 + i];
                }
                p.precision /= rows.size();
                p.recall /= rows.size();
                curves->push_back(p);
            }
        }
    }
    return aggregate(scores, beta2);
}

namespace {

nlohmann::json report_json(const EvalReport& report) {
    nlohmann::json j;
    j["dataset"] = {{"map", report.map},
                    {"mar", report.mar},
                    {"f_beta", report.f_beta},
                    {"mae", report.mae}};
    j["beta2"] = report.beta2;
    j["threshold_policy"] = report.threshold_policy;
    j["per_video"] = nlohmann::json::array();
    for (const auto& v : report.per_video)
        j["per_video"].push_back({{"video_id", v.video_id},
                                  {"map", v.map},
                                  {"mar", v.mar},
                                  {"mae", v.mae},
                                  {"n_keyframes", v.n}});
    return j;
}

void write_json(const EvalReport& report, const fs::path& file) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << report_json(report).dump(2) << "\n";
}

void write_csv(const EvalReport& report, const fs::path& file) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << "video_id,map,mar,mae,n\n";
    char buf[256];
    for (const auto& v : report.per_video) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%d\n", v.video_id.c_str(), v.map,
                      v.mar, v.mae, v.n);
        out << buf;
    }
    int total = 0;
    for (const auto& v : report.per_video) total += v.n;
    std::snprintf(buf, sizeof(buf), "ALL,%.6f,%.6f,%.6f,%d\n", report.map, report.mar,
                  report.mae, total);
    out << buf;
}

}  // namespace

void write_report(const EvalReport& report, const fs::path& out) {
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    const std::string ext = out.extension().string();
    if (ext == ".json") {
        write_json(report, out);
    } else if (ext == ".csv") {
        write_csv(report, out);
    } else {
        write_json(report, fs::path(out.string() + ".json"));
        write_csv(report, fs::path(out.string() + ".csv"));
    }
}

void write_curves(const std::vector<CurvePoint>& curves, const fs::path& out) {
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    std::ofstream f(out);
    if (!f) throw DataError("cannot write " + out.string());
    f << "video_id,threshold,precision,recall\n";
    char buf[256];
    for (const auto& p : curves) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f\n", p.video_id.c_str(), p.threshold,
                      p.precision, p.recall);
        f << buf;
    }
}

}  // namespace vsod
