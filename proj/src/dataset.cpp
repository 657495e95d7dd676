#include "vsod/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace vsod {

namespace {

std::vector<fs::path> sorted_pngs(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

int trailing_index(const fs::path& file) {
    const std::string stem = file.stem().string();
    size_t end = stem.size();
    while (end > 0 && std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
    if (end == stem.size())
        throw DataError("no frame index in filename: " + file.string());
    return std::stoi(stem.substr(end));
}

}  // namespace

FrameSequence load_video(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw DataError("video directory not found: " + dir.string());

    fs::path frames_dir = dir / "frames";
    if (!fs::is_directory(frames_dir)) frames_dir = dir;

    FrameSequence seq;
    seq.video_id = dir.filename().string();

    for (const auto& file : sorted_pngs(frames_dir)) {
        cv::Mat bgr = cv::imread(file.string(), cv::IMREAD_COLOR);
        if (bgr.empty())
            throw DataError("failed to decode frame: " + file.string());
        if (!seq.frames.empty() && bgr.size() != seq.frames.front().size())
            throw DataError("frame size mismatch: " + file.string());
        cv::Mat rgb;
        cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
        seq.frames.push_back(rgb);
    }
    if (seq.frames.empty())
        throw DataError("no frames found in " + frames_dir.string());
    seq.original_size = seq.frames.front().size();

    const fs::path meta = dir / "meta.json";
    if (fs::exists(meta)) {
        std::ifstream in(meta);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("bad meta.json in " + dir.string() + ": " + e.what());
        }
        if (j.contains("fps")) seq.fps = j["fps"].get<double>();
        if (j.contains("video_id")) seq.video_id = j["video_id"].get<std::string>();
        if (seq.fps <= 0)
            throw DataError("non-positive fps in " + meta.string());
    }
    return seq;
}

cv::Mat resize_max_side(const cv::Mat& frame, int max_side) {
    const int longer = std::max(frame.cols, frame.rows);
    if (longer <= max_side) return frame;
    const double scale = static_cast<double>(max_side) / longer;
    cv::Size target(std::max(1, static_cast<int>(std::lround(frame.cols * scale))),
                    std::max(1, static_cast<int>(std::lround(frame.rows * scale))));
    cv::Mat out;
    cv::resize(frame, out, target, 0, 0, cv::INTER_LINEAR);
    return out;
}

FixationLog load_fixations(const fs::path& file, cv::Size frame_size) {
    std::ifstream in(file);
    if (!in)
        throw DataError("cannot open fixation log: " + file.string());

    std::string line;
    if (!std::getline(in, line))
        throw DataError("empty fixation log: " + file.string());
    std::string header = line;
    header.erase(std::remove_if(header.begin(), header.end(),
                                [](unsigned char c) { return std::isspace(c); }),
                 header.end());
    if (header != "x,y,t,subject")
        throw DataError("unexpected fixation header in " + file.string() + ": " + line);

    FixationLog log;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string field[4];
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(ss, field[i], ','))
                throw DataError(file.string() + ":" + std::to_string(lineno) +
                                ": expected 4 comma-separated fields");
        }
        Fixation f;
        try {
            f.x = std::stod(field[0]);
            f.y = std::stod(field[1]);
            f.t = std::stod(field[2]);
            f.subject = std::stoi(field[3]);
        } catch (const std::exception&) {
            throw DataError(file.string() + ":" + std::to_string(lineno) +
                            ": malformed record: " + line);
        }
        const double xmax = frame_size.width - 1, ymax = frame_size.height - 1;
        if (f.x < 0 || f.x > xmax || f.y < 0 || f.y > ymax) {
            f.x = std::clamp(f.x, 0.0, xmax);
            f.y = std::clamp(f.y, 0.0, ymax);
            ++log.clamp_warnings;
        }
        log.records.push_back(f);
    }
    std::stable_sort(log.records.begin(), log.records.end(),
                     [](const Fixation& a, const Fixation& b) { return a.t < b.t; });
    return log;
}

ObjectMaskSet load_object_masks(const fs::path& dir) {
    ObjectMaskSet set;
    if (!fs::is_directory(dir)) return set;

    for (const auto& file : sorted_pngs(dir)) {
        cv::Mat raw = cv::imread(file.string(), cv::IMREAD_UNCHANGED);
        if (raw.empty())
            throw DataError("failed to decode label map: " + file.string());
        if (raw.channels() != 1)
            throw DataError("label map must be single-channel: " + file.string());

        MaskKeyframe kf;
        kf.frame_index = trailing_index(file);
        raw.convertTo(kf.labels, CV_16U);

        std::map<uint16_t, int> counts;
        for (int y = 0; y < kf.labels.rows; ++y)
            for (int x = 0; x < kf.labels.cols; ++x)
                if (kf.labels(y, x) > 0) ++counts[kf.labels(y, x)];
        for (int y = 0; y < kf.labels.rows; ++y)
            for (int x = 0; x < kf.labels.cols; ++x) {
                const uint16_t v = kf.labels(y, x);
                if (v > 0 && counts[v] < 16) kf.labels(y, x) = 0;
            }
        set.keyframes.push_back(std::move(kf));
    }
    std::sort(set.keyframes.begin(), set.keyframes.end(),
              [](const MaskKeyframe& a, const MaskKeyframe& b) {
                  return a.frame_index < b.frame_index;
              });
    return set;
}

std::vector<MaskKeyframe> load_binary_masks(const fs::path& dir) {
    std::vector<MaskKeyframe> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& file : sorted_pngs(dir)) {
        cv::Mat raw = cv::imread(file.string(), cv::IMREAD_GRAYSCALE);
        if (raw.empty())
            throw DataError("failed to decode mask: " + file.string());
        MaskKeyframe kf;
        kf.frame_index = trailing_index(file);
        kf.labels.create(raw.rows, raw.cols);
        for (int y = 0; y < raw.rows; ++y)
            for (int x = 0; x < raw.cols; ++x)
                kf.labels(y, x) = raw.at<uint8_t>(y, x) > 0 ? 1 : 0;
        out.push_back(std::move(kf));
    }
    std::sort(out.begin(), out.end(), [](const MaskKeyframe& a, const MaskKeyframe& b) {
        return a.frame_index < b.frame_index;
    });
    return out;
}

cv::Mat1f load_saliency_map(const fs::path& file) {
    cv::Mat raw = cv::imread(file.string(), cv::IMREAD_GRAYSCALE);
    if (raw.empty())
        throw DataError("failed to decode saliency map: " + file.string());
    cv::Mat1f out;
    raw.convertTo(out, CV_32F, 1.0 / 255.0);
    return out;
}

void write_saliency_map(const cv::Mat1f& map, const fs::path& file) {
    cv::Mat1b bytes(map.size());
    for (int y = 0; y < map.rows; ++y)
        for (int x = 0; x < map.cols; ++x) {
            const float v = std::clamp(map(y, x), 0.0f, 1.0f);
            bytes(y, x) = static_cast<uint8_t>(std::lround(v * 255.0f));
        }
    fs::create_directories(file.parent_path());
    if (!cv::imwrite(file.string(), bytes))
        throw DataError("failed to write " + file.string());
}

void write_binary_mask(const cv::Mat1b& mask, const fs::path& file) {
    cv::Mat1b bytes(mask.size());
    for (int y = 0; y < mask.rows; ++y)
        for (int x = 0; x < mask.cols; ++x) bytes(y, x) = mask(y, x) ? 255 : 0;
    fs::create_directories(file.parent_path());
    if (!cv::imwrite(file.string(), bytes))
        throw DataError("failed to write " + file.string());
}

void write_label_map(const cv::Mat1w& labels, const fs::path& file) {
    fs::create_directories(file.parent_path());
    if (!cv::imwrite(file.string(), labels))
        throw DataError("failed to write " + file.string());
}

std::vector<fs::path> list_videos(const fs::path& root) {
    if (!fs::is_directory(root))
        throw DataError("dataset root not found: " + root.string());
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && fs::is_directory(entry.path() / "frames"))
            dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

std::string frame_name(const char* prefix, int index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%06d.png", prefix, index);
    return buf;
}

}  // namespace vsod
