#include "vsod/objectness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "vsod/dataset.hpp"
#include "vsod/mbd.hpp"

namespace fs = std::filesystem;

namespace vsod {

namespace {

// Component masks are kept as tight bounding-box crops until the final
// top-k selection; solidity and the area prior only need the crop.
struct Candidate {
    cv::Mat1b patch;
    cv::Rect box;
    int area = 0;
    double objectness = 0.0;
};

double solidity(const cv::Mat1b& mask, int area) {
    std::vector<std::vector<cv::Point>> contours;
    cv::findContours(mask.clone(), contours, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_SIMPLE);
    if (contours.empty()) return 0.0;
    std::vector<cv::Point> pts;
    for (const auto& c : contours) pts.insert(pts.end(), c.begin(), c.end());
    std::vector<cv::Point> hull;
    cv::convexHull(pts, hull);
    const double hull_area = cv::contourArea(hull);
    if (hull_area <= 0.0) return 1.0;  // degenerate line/point component
    return std::min(1.0, area / hull_area);
}

}  // namespace

ProposalSet generate_proposals_from_sum(const cv::Mat1f& mbd_sum, int k) {
    CV_Assert(k >= 1);
    const cv::Mat1f s = rescale_unit(mbd_sum);
    const int area_total = s.rows * s.cols;

    std::vector<Candidate> cands;
    cv::Mat1b bin(s.size());
    cv::Mat1i cc;
    cv::Mat stats, centroids;
    for (int i = 1; i <= 16; ++i) {
        const float t = i / 17.0f;
        for (int y = 0; y < s.rows; ++y)
            for (int x = 0; x < s.cols; ++x) bin(y, x) = s(y, x) >= t ? 255 : 0;
        const int n = cv::connectedComponentsWithStats(bin, cc, stats, centroids, 4, CV_32S);
        for (int label = 1; label < n; ++label) {
            const int area = stats.at<int>(label, cv::CC_STAT_AREA);
            const cv::Rect box(
                stats.at<int>(label, cv::CC_STAT_LEFT), stats.at<int>(label, cv::CC_STAT_TOP),
                stats.at<int>(label, cv::CC_STAT_WIDTH), stats.at<int>(label, cv::CC_STAT_HEIGHT));
            bool dup = false;
            for (const auto& m : cands) {
                // Cheap IoU upper bounds (area ratio, then bbox overlap)
                // rule out most pairs before any pixels are touched.
                const long long lo = std::min(area, m.area), hi = std::max(area, m.area);
                if (lo * 10 < hi * 9) continue;
                const cv::Rect ri = box & m.box;
                if (static_cast<long long>(ri.area()) * 10 < hi * 9) continue;
                long long inter = 0;
                for (int y = ri.y; y < ri.y + ri.height; ++y)
                    for (int x = ri.x; x < ri.x + ri.width; ++x)
                        inter += cc(y, x) == label && m.patch(y - m.box.y, x - m.box.x);
                if (inter * 10 >= (area + m.area - inter) * 9) {
                    dup = true;
                    break;
                }
            }
            if (dup) continue;
            Candidate cand;
            cand.patch = cv::Mat1b::zeros(box.size());
            for (int y = 0; y < box.height; ++y)
                for (int x = 0; x < box.width; ++x)
                    if (cc(box.y + y, box.x + x) == label) cand.patch(y, x) = 255;
            cand.box = box;
            cand.area = area;
            cands.push_back(std::move(cand));
        }
    }

    ProposalSet set;
    if (cands.empty()) {
        Proposal whole;
        whole.mask = cv::Mat1b(s.size(), 255);
        whole.objectness = 0.0;
        set.proposals.push_back(std::move(whole));
        return set;
    }

    for (auto& c : cands) {
        const double frac = static_cast<double>(c.area) / area_total;
        const double area_prior = std::exp(-(frac - 0.15) * (frac - 0.15) / (2 * 0.1 * 0.1));
        const bool on_border = c.box.x == 0 || c.box.y == 0 || c.box.x + c.box.width == s.cols ||
                               c.box.y + c.box.height == s.rows;
        c.objectness = solidity(c.patch, c.area) * (on_border ? 0.3 : 1.0) * area_prior;
    }

    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.objectness > b.objectness;
    });
    if (static_cast<int>(cands.size()) > k) cands.resize(k);

    for (const auto& c : cands) {
        Proposal p;
        p.mask = cv::Mat1b::zeros(s.size());
        c.patch.copyTo(p.mask(c.box));
        p.objectness = c.objectness;
        set.proposals.push_back(std::move(p));
    }
    return set;
}

ProposalSet generate_proposals(const std::array<cv::Mat1f, kChannelCount>& channels, int k,
                               int mbd_passes) {
    const cv::Mat1b seeds = border_seeds(channels[kChL].size());
    cv::Mat1f sum = cv::Mat1f::zeros(channels[kChL].size());
    for (int c : kMbdChannels) sum += mbd_transform(channels[c], seeds, mbd_passes);
    return generate_proposals_from_sum(sum, k);
}

namespace {

// Spectral residual of one channel: squared magnitude of the inverse
// transform after flattening the log-amplitude spectrum.
cv::Mat1d spectral_residual(const cv::Mat1f& channel) {
    cv::Mat1d input;
    channel.convertTo(input, CV_64F);

    cv::Mat planes[2] = {input, cv::Mat1d::zeros(input.size())};
    cv::Mat complex;
    cv::merge(planes, 2, complex);
    cv::dft(complex, complex);
    cv::split(complex, planes);

    cv::Mat1d re = planes[0], im = planes[1];
    cv::Mat1d amp(input.size()), logamp(input.size());
    double amp_max = 0.0;
    for (int y = 0; y < amp.rows; ++y)
        for (int x = 0; x < amp.cols; ++x) {
            const double a = std::sqrt(re(y, x) * re(y, x) + im(y, x) * im(y, x));
            amp(y, x) = a;
            amp_max = std::max(amp_max, a);
            logamp(y, x) = std::log(std::max(a, 1e-30));
        }

    // Frequencies with (numerically) zero amplitude carry no signal. They
    // are dropped from the output, and the local log-spectrum average is
    // taken over live bins only so their log floor cannot inflate the
    // residual of adjacent bins.
    const double floor = 1e-8 * amp_max;
    cv::Mat1d live(amp.size()), masked_log(amp.size());
    for (int y = 0; y < amp.rows; ++y)
        for (int x = 0; x < amp.cols; ++x) {
            const bool on = amp(y, x) > floor;
            live(y, x) = on ? 1.0 : 0.0;
            masked_log(y, x) = on ? logamp(y, x) : 0.0;
        }
    cv::Mat1d local, weight;
    cv::blur(masked_log, local, cv::Size(3, 3), cv::Point(-1, -1), cv::BORDER_REPLICATE);
    cv::blur(live, weight, cv::Size(3, 3), cv::Point(-1, -1), cv::BORDER_REPLICATE);

    for (int y = 0; y < amp.rows; ++y)
        for (int x = 0; x < amp.cols; ++x) {
            if (amp(y, x) <= floor) {
                re(y, x) = 0.0;
                im(y, x) = 0.0;
                continue;
            }
            const double mean_log = local(y, x) / weight(y, x);
            const double r = std::min(logamp(y, x) - mean_log, 50.0);
            const double scale = std::exp(r) / amp(y, x);
            re(y, x) *= scale;
            im(y, x) *= scale;
        }

    planes[0] = re;
    planes[1] = im;
    cv::merge(planes, 2, complex);
    cv::dft(complex, complex, cv::DFT_INVERSE | cv::DFT_SCALE);
    cv::split(complex, planes);
    const cv::Mat1d ire = planes[0], iim = planes[1];

    cv::Mat1d out(input.size());
    for (int y = 0; y < out.rows; ++y)
        for (int x = 0; x < out.cols; ++x)
            out(y, x) = ire(y, x) * ire(y, x) + iim(y, x) * iim(y, x);
    return out;
}

cv::Mat1f space_density(const std::array<cv::Mat1f, kChannelCount>& channels,
                        const std::array<int, 3>& idx) {
    const cv::Size size = channels[idx[0]].size();
    cv::Mat1d sum = cv::Mat1d::zeros(size);
    for (int c : idx) sum += spectral_residual(channels[c]);

    const double sigma = 0.03 * std::max(size.width, size.height);
    const int ksize = 2 * static_cast<int>(std::ceil(3 * sigma)) + 1;
    cv::Mat1d blurred;
    cv::GaussianBlur(sum, blurred, cv::Size(ksize, ksize), sigma, sigma, cv::BORDER_REPLICATE);

    cv::Mat1f scaled;
    blurred.convertTo(scaled, CV_32F);
    scaled = rescale_unit(scaled);

    const double total = cv::sum(scaled)[0];
    cv::Mat1f out(size);
    if (total <= 1e-12) {
        out.setTo(static_cast<float>(1.0 / (size.width * size.height)));
    } else {
        const float inv = static_cast<float>(1.0 / total);
        for (int y = 0; y < size.height; ++y)
            for (int x = 0; x < size.width; ++x) out(y, x) = scaled(y, x) * inv;
    }
    return out;
}

}  // namespace

FixationDensityMaps predict_fixation_maps(const std::array<cv::Mat1f, kChannelCount>& channels) {
    FixationDensityMaps maps;
    maps.lab = space_density(channels, {kChL, kChA, kChBb});
    maps.hsv = space_density(channels, {kChH, kChS, kChV});
    maps.xyt = space_density(channels, {kChX, kChY, kChT});
    return maps;
}

double fixation_ratio(const cv::Mat1b& mask, const cv::Mat1f& density) {
    CV_Assert(mask.size() == density.size());
    double sum = 0.0;
    for (int y = 0; y < mask.rows; ++y)
        for (int x = 0; x < mask.cols; ++x)
            if (mask(y, x)) sum += density(y, x);
    return sum;
}

cv::Mat1f object_saliency_raw(const ProposalSet& props, const FixationDensityMaps& maps) {
    cv::Mat1f acc = cv::Mat1f::zeros(maps.lab.size());
    for (const auto& p : props.proposals) {
        const double v = fixation_ratio(p.mask, maps.lab) * fixation_ratio(p.mask, maps.hsv) *
                         fixation_ratio(p.mask, maps.xyt);
        const float fv = static_cast<float>(v);
        for (int y = 0; y < acc.rows; ++y)
            for (int x = 0; x < acc.cols; ++x)
                if (p.mask(y, x)) acc(y, x) += fv;
    }
    return acc;
}

cv::Mat1f object_saliency(const ProposalSet& props, const FixationDensityMaps& maps) {
    return rescale_unit(object_saliency_raw(props, maps));
}

ProposalSet load_proposals(const fs::path& video_dir, int frame_index, int k) {
    const fs::path dir = video_dir / "proposals";
    const fs::path csv = dir / "objectness.csv";
    std::ifstream in(csv);
    if (!in) throw DataError("cannot open " + csv.string());

    std::string line;
    if (!std::getline(in, line) || line.find("frame") == std::string::npos)
        throw DataError("bad header in " + csv.string());

    ProposalSet set;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string f, i, o;
        if (!std::getline(ss, f, ',') || !std::getline(ss, i, ',') || !std::getline(ss, o, ','))
            throw DataError(csv.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
        int frame, index;
        double objectness;
        try {
            frame = std::stoi(f);
            index = std::stoi(i);
            objectness = std::stod(o);
        } catch (const std::exception&) {
            throw DataError(csv.string() + ":" + std::to_string(lineno) + ": malformed record");
        }
        if (frame != frame_index) continue;

        char name[64];
        std::snprintf(name, sizeof(name), "mask_%06d_%03d.png", frame, index);
        cv::Mat raw = cv::imread((dir / name).string(), cv::IMREAD_GRAYSCALE);
        if (raw.empty()) throw DataError("missing proposal mask " + (dir / name).string());
        Proposal p;
        p.mask = raw > 0;
        p.objectness = objectness;
        set.proposals.push_back(std::move(p));
    }
    std::stable_sort(set.proposals.begin(), set.proposals.end(),
                     [](const Proposal& a, const Proposal& b) {
                         return a.objectness > b.objectness;
                     });
    if (static_cast<int>(set.proposals.size()) > k) set.proposals.resize(k);
    if (set.proposals.empty())
        throw DataError("no proposals for frame " + std::to_string(frame_index) + " in " +
                        dir.string());
    return set;
}

FixationDensityMaps load_fixation_maps(const fs::path& video_dir, int frame_index) {
    auto load_one = [&](const char* space) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%06d.png", space, frame_index);
        const fs::path file = video_dir / "fixmaps" / name;
        cv::Mat raw = cv::imread(file.string(), cv::IMREAD_GRAYSCALE);
        if (raw.empty()) throw DataError("missing fixation map " + file.string());
        cv::Mat1f m;
        raw.convertTo(m, CV_32F);
        const double total = cv::sum(m)[0];
        if (total <= 0.0)
            m.setTo(static_cast<float>(1.0 / (m.rows * m.cols)));
        else
            m *= static_cast<float>(1.0 / total);
        return m;
    };
    FixationDensityMaps maps;
    maps.lab = load_one("lab");
    maps.hsv = load_one("hsv");
    maps.xyt = load_one("xyt");
    return maps;
}

}  // namespace vsod
