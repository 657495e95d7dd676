#include "vsod/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <climits>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "vsod/eval.hpp"
#include "vsod/objectness.hpp"
#include "vsod/slic.hpp"

namespace fs = std::filesystem;

namespace vsod {

namespace {

using nlohmann::json;

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected a number, got '" + value + "'");
    }
}

long long parse_ll(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected an integer, got '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    long long v = parse_ll(key, value);
    if (v < INT_MIN || v > INT_MAX)
        throw ConfigError("config key " + key + ": integer out of range: " + value);
    return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size() || value.find('-') != std::string::npos)
            throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected a non-negative integer, got '" +
                          value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key " + key + ": expected true/false, got '" + value + "'");
}

std::array<bool, 3> parse_cues(const std::string& value) {
    std::array<bool, 3> cues = {false, false, false};
    std::stringstream ss(value);
    std::string item;
    bool any = false;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        item = item.substr(b, item.find_last_not_of(" \t") - b + 1);
        if (item == "pixel")
            cues[kCuePixel] = true;
        else if (item == "superpixel")
            cues[kCueSuperpixel] = true;
        else if (item == "object")
            cues[kCueObject] = true;
        else
            throw ConfigError("cues.enabled: unknown cue '" + item + "'");
        any = true;
    }
    if (!any) throw ConfigError("cues.enabled: at least one cue required");
    return cues;
}

std::vector<std::string> cue_names(const std::array<bool, 3>& cues) {
    static const char* kNames[3] = {"pixel", "superpixel", "object"};
    std::vector<std::string> names;
    for (int i = 0; i < 3; ++i)
        if (cues[i]) names.push_back(kNames[i]);
    return names;
}

std::array<bool, 3> cue_flags(const std::vector<std::string>& names) {
    std::array<bool, 3> cues = {false, false, false};
    for (const auto& n : names) {
        if (n == "pixel")
            cues[kCuePixel] = true;
        else if (n == "superpixel")
            cues[kCueSuperpixel] = true;
        else if (n == "object")
            cues[kCueObject] = true;
        else
            throw ConfigError("model lists unknown cue '" + n + "'");
    }
    return cues;
}

void flatten_json(const json& j, const std::string& prefix, PipelineConfig& cfg) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        const json& v = it.value();
        if (v.is_object()) {
            flatten_json(v, key, cfg);
        } else if (v.is_array()) {
            if (key != "cues.enabled")
                throw ConfigError("config key " + key + ": arrays not supported here");
            std::string joined;
            for (const auto& e : v) {
                if (!e.is_string()) throw ConfigError("cues.enabled: expected strings");
                if (!joined.empty()) joined += ",";
                joined += e.get<std::string>();
            }
            apply_override(cfg, key, joined);
        } else if (v.is_string()) {
            apply_override(cfg, key, v.get<std::string>());
        } else if (v.is_boolean()) {
            apply_override(cfg, key, v.get<bool>() ? "true" : "false");
        } else {
            apply_override(cfg, key, v.dump());
        }
    }
}

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    double lap() {
        auto t1 = std::chrono::steady_clock::now();
        double s = std::chrono::duration<double>(t1 - t0).count();
        t0 = t1;
        return s;
    }
};

std::string read_file_bytes(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot read " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_json_file(const json& j, const fs::path& file) {
    fs::create_directories(file.parent_path().empty() ? fs::path(".") : file.parent_path());
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << j.dump(2) << "\n";
}

struct VideoInfo {
    fs::path dir;
    std::string id;
    int frames = 0;
    cv::Size proc_size;
    double fps = 30.0;
};

double read_meta_fps(const fs::path& dir) {
    const fs::path meta = dir / "meta.json";
    if (!fs::exists(meta)) return 30.0;
    std::ifstream in(meta);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError(meta.string() + ": " + e.what());
    }
    return j.value("fps", 30.0);
}

std::vector<fs::path> sorted_pngs(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<VideoInfo> scan_dataset(const fs::path& root, int max_side) {
    std::vector<VideoInfo> infos;
    for (const auto& dir : list_videos(root)) {
        VideoInfo info;
        info.dir = dir;
        info.id = dir.filename().string();
        const fs::path frame_dir = fs::exists(dir / "frames") ? dir / "frames" : dir;
        const auto files = sorted_pngs(frame_dir);
        if (files.empty()) throw DataError("no frames under " + frame_dir.string());
        info.frames = static_cast<int>(files.size());
        cv::Mat first = cv::imread(files.front().string(), cv::IMREAD_COLOR);
        if (first.empty()) throw DataError("cannot decode " + files.front().string());
        info.proc_size = resize_max_side(first, max_side).size();
        info.fps = read_meta_fps(dir);
        infos.push_back(std::move(info));
    }
    if (infos.empty()) throw DataError("no videos under " + root.string());
    return infos;
}

/// Runs fn(0..n) on a pool of `jobs` threads; the first exception wins
/// and is rethrown after the pool drains.
void for_each_video(int jobs, int n, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!err) err = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

json manifest_json(const std::string& command, const PipelineConfig& cfg,
                   const std::vector<VideoInfo>& videos, const fs::path& model_file) {
    json m;
    m["command"] = command;
    m["config"] = config_json(cfg);
    m["config_hash"] = fnv1a64_hex(m["config"].dump());
    m["seed"] = cfg.train_seed;
    m["model"] = model_file.empty() ? "" : model_file.string();
    m["model_hash"] = model_file.empty() ? "" : fnv1a64_hex(read_file_bytes(model_file));
    json ids = json::array();
    for (const auto& v : videos) ids.push_back(v.id);
    m["videos"] = ids;
    return m;
}

struct Draw {
    int video = 0, frame = 0, x = 0, y = 0;
};

std::vector<Draw> draw_samples(const std::vector<VideoInfo>& videos, long long n,
                               std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Draw> draws(static_cast<std::size_t>(n));
    for (auto& d : draws) {
        d.video = static_cast<int>(rng.below(videos.size()));
        const VideoInfo& v = videos[static_cast<std::size_t>(d.video)];
        d.frame = static_cast<int>(rng.below(static_cast<std::uint64_t>(v.frames)));
        d.x = static_cast<int>(rng.below(static_cast<std::uint64_t>(v.proc_size.width)));
        d.y = static_cast<int>(rng.below(static_cast<std::uint64_t>(v.proc_size.height)));
    }
    return draws;
}

FrameSequence load_resized(const VideoInfo& info, int max_side) {
    FrameSequence seq = load_video(info.dir);
    for (auto& f : seq.frames) f = resize_max_side(f, max_side);
    return seq;
}

/// Trains the stack from hierarchical uniform samples (video, frame,
/// pixel), streaming one video at a time; extracted artifacts are kept
/// in `cache` when provided.
ModelArtifact train_from_dataset(const PipelineConfig& cfg, const std::vector<VideoInfo>& videos,
                                 std::vector<VideoArtifacts>* cache) {
    const int dim = 3 * (9 + cfg.window);
    const auto draws = draw_samples(videos, cfg.train_n_samples, cfg.train_seed);
    Eigen::MatrixXd samples(dim, static_cast<Eigen::Index>(draws.size()));

    std::vector<std::vector<int>> by_video(videos.size());
    for (std::size_t i = 0; i < draws.size(); ++i)
        by_video[static_cast<std::size_t>(draws[i].video)].push_back(static_cast<int>(i));

    for (std::size_t v = 0; v < videos.size(); ++v) {
        if (by_video[v].empty() && !cache) continue;
        const FrameSequence seq = load_resized(videos[v], cfg.max_side);
        VideoArtifacts va = extract_cues(seq, cfg, videos[v].dir);
        for (int idx : by_video[v]) {
            const Draw& d = draws[static_cast<std::size_t>(idx)];
            samples.col(idx) =
                assemble_features(va.cues, va.flow, d.frame, d.x, d.y, cfg.window, cfg.cues);
        }
        if (cache) (*cache)[v] = std::move(va);
    }

    ModelArtifact model;
    model.enc = train_stack(samples, cfg.train, cfg.train_seed);
    model.cues = cue_names(cfg.cues);
    model.window = cfg.window;
    return model;
}

void write_video_maps(const std::vector<cv::Mat1f>& maps, const fs::path& dir) {
    fs::create_directories(dir);
    for (std::size_t t = 0; t < maps.size(); ++t)
        write_saliency_map(maps[t], dir / frame_name("sal_", static_cast<int>(t)));
}

/// Inference over every video; per-video artifacts come from `cache`
/// when present, otherwise each video is extracted on demand.
void infer_dataset(const PipelineConfig& cfg, const ModelArtifact& model,
                   const std::vector<VideoInfo>& videos, const fs::path& out, int jobs,
                   std::vector<VideoArtifacts>* cache, StageTimes* times) {
    PipelineConfig eff = cfg;
    eff.window = model.window;
    eff.cues = cue_flags(model.cues);

    std::mutex merge_mutex;
    for_each_video(jobs, static_cast<int>(videos.size()), [&](int i) {
        StageTimes local;
        Stopwatch total;
        VideoArtifacts va;
        if (cache && !(*cache)[static_cast<std::size_t>(i)].cues.empty()) {
            va = std::move((*cache)[static_cast<std::size_t>(i)]);
        } else {
            const FrameSequence seq = load_resized(videos[static_cast<std::size_t>(i)],
                                                   eff.max_side);
            va = extract_cues(seq, eff, videos[static_cast<std::size_t>(i)].dir, &local);
        }
        const auto maps = infer_video(va, model, eff, &local);
        write_video_maps(maps, out / va.video_id);
        local.total += total.lap();
        if (times) {
            std::lock_guard<std::mutex> lock(merge_mutex);
            times->add(local);
        }
    });
}

}  // namespace

PipelineConfig load_config(const fs::path& file) {
    PipelineConfig cfg;
    if (file.empty()) return cfg;
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config file " + file.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file " + file.string() + ": not a JSON object");
    flatten_json(j, "", cfg);
    return cfg;
}

void apply_override(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "resize.max_side") {
        cfg.max_side = parse_int(key, value);
        if (cfg.max_side < 1) throw ConfigError("resize.max_side must be >= 1");
    } else if (key == "flow.alpha") {
        cfg.flow.alpha = parse_double(key, value);
    } else if (key == "flow.levels") {
        cfg.flow.levels = parse_int(key, value);
    } else if (key == "flow.iters") {
        cfg.flow.iterations = parse_int(key, value);
    } else if (key == "features.signed_flow") {
        cfg.features.signed_flow = parse_bool(key, value);
    } else if (key == "mbd.passes") {
        cfg.mbd.mbd_passes = parse_int(key, value);
    } else if (key == "mbd.gamma") {
        cfg.mbd.smooth_gamma = parse_double(key, value);
    } else if (key == "mbd.border_band_frac") {
        cfg.mbd.border_band_frac = parse_double(key, value);
    } else if (key == "sp.n") {
        cfg.sp.slic.n_target = parse_int(key, value);
    } else if (key == "sp.compactness") {
        cfg.sp.slic.compactness = parse_double(key, value);
    } else if (key == "sp.iters") {
        cfg.sp.slic.iterations = parse_int(key, value);
    } else if (key == "smd.lambda") {
        cfg.sp.smd.lambda = parse_double(key, value);
    } else if (key == "smd.max_iters") {
        cfg.sp.smd.max_iters = parse_int(key, value);
    } else if (key == "smd.tol") {
        cfg.sp.smd.tol = parse_double(key, value);
    } else if (key == "obj.k") {
        cfg.obj_k = parse_int(key, value);
    } else if (key == "obj.provider") {
        if (value != "builtin" && value != "files")
            throw ConfigError("obj.provider must be builtin or files");
        cfg.obj_provider = value;
    } else if (key == "train.n_samples") {
        cfg.train_n_samples = parse_ll(key, value);
        if (cfg.train_n_samples < 1) throw ConfigError("train.n_samples must be >= 1");
    } else if (key == "train.seed") {
        cfg.train_seed = parse_u64(key, value);
    } else if (key == "train.epochs") {
        cfg.train.epochs = parse_int(key, value);
    } else if (key == "train.lr") {
        cfg.train.lr = parse_double(key, value);
    } else if (key == "train.batch") {
        cfg.train.batch = parse_int(key, value);
    } else if (key == "train.lambda_w") {
        cfg.train.lambda_w = parse_double(key, value);
    } else if (key == "train.lambda_s") {
        cfg.train.lambda_s = parse_double(key, value);
    } else if (key == "train.rho") {
        cfg.train.rho = parse_double(key, value);
    } else if (key == "train.lr_halve_every") {
        cfg.train.lr_halve_every = parse_int(key, value);
    } else if (key == "train.momentum") {
        cfg.train.momentum = parse_double(key, value);
    } else if (key == "post.temporal_width") {
        cfg.post.temporal_width = parse_int(key, value);
    } else if (key == "post.temporal_sigma") {
        cfg.post.temporal_sigma = parse_double(key, value);
    } else if (key == "post.sigmoid_slope") {
        cfg.post.sigmoid_slope = parse_double(key, value);
    } else if (key == "post.sigmoid_center") {
        cfg.post.sigmoid_center = parse_double(key, value);
    } else if (key == "post.min_component_frac") {
        cfg.post.min_component_frac = parse_double(key, value);
    } else if (key == "window.w") {
        cfg.window = parse_int(key, value);
        if (cfg.window < 0) throw ConfigError("window.w must be >= 0");
    } else if (key == "cues.enabled") {
        cfg.cues = parse_cues(value);
    } else if (key == "annotate.sigma_s_frac") {
        cfg.density.sigma_s_frac = parse_double(key, value);
    } else if (key == "annotate.sigma_t") {
        cfg.density.sigma_t = parse_double(key, value);
    } else if (key == "annotate.temporal_cutoff") {
        cfg.density.temporal_cutoff = parse_double(key, value);
    } else if (key == "annotate.score_threshold") {
        cfg.density.score_threshold = parse_double(key, value);
    } else if (key == "annotate.keyframe_stride") {
        cfg.density.keyframe_stride = parse_int(key, value);
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

json config_json(const PipelineConfig& cfg) {
    json j;
    j["resize"]["max_side"] = cfg.max_side;
    j["flow"]["alpha"] = cfg.flow.alpha;
    j["flow"]["levels"] = cfg.flow.levels;
    j["flow"]["iters"] = cfg.flow.iterations;
    j["features"]["signed_flow"] = cfg.features.signed_flow;
    j["mbd"]["passes"] = cfg.mbd.mbd_passes;
    j["mbd"]["gamma"] = cfg.mbd.smooth_gamma;
    j["mbd"]["border_band_frac"] = cfg.mbd.border_band_frac;
    j["sp"]["n"] = cfg.sp.slic.n_target;
    j["sp"]["compactness"] = cfg.sp.slic.compactness;
    j["sp"]["iters"] = cfg.sp.slic.iterations;
    j["smd"]["lambda"] = cfg.sp.smd.lambda;
    j["smd"]["max_iters"] = cfg.sp.smd.max_iters;
    j["smd"]["tol"] = cfg.sp.smd.tol;
    j["obj"]["k"] = cfg.obj_k;
    j["obj"]["provider"] = cfg.obj_provider;
    j["train"]["n_samples"] = cfg.train_n_samples;
    j["train"]["seed"] = cfg.train_seed;
    j["train"]["epochs"] = cfg.train.epochs;
    j["train"]["lr"] = cfg.train.lr;
    j["train"]["batch"] = cfg.train.batch;
    j["train"]["lambda_w"] = cfg.train.lambda_w;
    j["train"]["lambda_s"] = cfg.train.lambda_s;
    j["train"]["rho"] = cfg.train.rho;
    j["train"]["lr_halve_every"] = cfg.train.lr_halve_every;
    j["train"]["momentum"] = cfg.train.momentum;
    j["post"]["temporal_width"] = cfg.post.temporal_width;
    j["post"]["temporal_sigma"] = cfg.post.temporal_sigma;
    j["post"]["sigmoid_slope"] = cfg.post.sigmoid_slope;
    j["post"]["sigmoid_center"] = cfg.post.sigmoid_center;
    j["post"]["min_component_frac"] = cfg.post.min_component_frac;
    j["window"]["w"] = cfg.window;
    j["cues"]["enabled"] = cue_names(cfg.cues);
    j["annotate"]["sigma_s_frac"] = cfg.density.sigma_s_frac;
    j["annotate"]["sigma_t"] = cfg.density.sigma_t;
    j["annotate"]["temporal_cutoff"] = cfg.density.temporal_cutoff;
    j["annotate"]["score_threshold"] = cfg.density.score_threshold;
    j["annotate"]["keyframe_stride"] = cfg.density.keyframe_stride;
    return j;
}

void StageTimes::add(const StageTimes& other) {
    optical_flow += other.optical_flow;
    object_proposal += other.object_proposal;
    pixel += other.pixel;
    superpixel += other.superpixel;
    object += other.object;
    encode_post += other.encode_post;
    total += other.total;
    frames += other.frames;
}

json StageTimes::per_frame_json() const {
    const double n = frames > 0 ? static_cast<double>(frames) : 1.0;
    json j;
    j["optical_flow"] = optical_flow / n;
    j["object_proposal"] = object_proposal / n;
    j["pixel"] = pixel / n;
    j["superpixel"] = superpixel / n;
    j["object"] = object / n;
    j["encode_post"] = encode_post / n;
    j["total"] = total / n;
    j["frames"] = frames;
    return j;
}

VideoArtifacts extract_cues(const FrameSequence& seq, const PipelineConfig& cfg,
                            const fs::path& video_dir, StageTimes* times) {
    if (seq.frames.empty()) throw DataError("video " + seq.video_id + " has no frames");
    VideoArtifacts va;
    va.video_id = seq.video_id;
    va.fps = seq.fps;
    va.frames = static_cast<int>(seq.frames.size());
    va.size = seq.frames.front().size();

    StageTimes local;
    Stopwatch sw;
    HornSchunckFlow estimator(cfg.flow);
    va.flow = compute_flow(seq, estimator);
    local.optical_flow += sw.lap();

    const ChannelStack channels = compute_channels(seq, va.flow, cfg.features);
    const bool builtin_obj = cfg.cues[kCueObject] && cfg.obj_provider == "builtin";
    const bool file_obj = cfg.cues[kCueObject] && cfg.obj_provider == "files";

    va.cues.resize(static_cast<std::size_t>(va.frames));
    for (int t = 0; t < va.frames; ++t) {
        CueMaps& cm = va.cues[static_cast<std::size_t>(t)];
        const auto& ch = channels.frames[static_cast<std::size_t>(t)];
        cv::Mat1f mbd_sum;

        sw.lap();
        if (cfg.cues[kCuePixel]) {
            PixelCue pc = compute_pixel_cue(ch, cfg.mbd);
            cm.pixel = pc.saliency;
            mbd_sum = pc.mbd_sum;
        } else {
            cm.pixel = cv::Mat1f::zeros(va.size);
        }
        local.pixel += sw.lap();

        if (cfg.cues[kCueSuperpixel]) {
            cm.superpixel = superpixel_saliency(ch, cfg.sp);
        } else {
            cm.superpixel = cv::Mat1f::zeros(va.size);
        }
        local.superpixel += sw.lap();

        if (builtin_obj) {
            ProposalSet props = mbd_sum.empty()
                                    ? generate_proposals(ch, cfg.obj_k, cfg.mbd.mbd_passes)
                                    : generate_proposals_from_sum(mbd_sum, cfg.obj_k);
            local.object_proposal += sw.lap();
            const FixationDensityMaps fm = predict_fixation_maps(ch);
            cm.object = object_saliency(props, fm);
            local.object += sw.lap();
        } else if (file_obj) {
            ProposalSet props = load_proposals(video_dir, t, cfg.obj_k);
            local.object_proposal += sw.lap();
            const FixationDensityMaps fm = load_fixation_maps(video_dir, t);
            cm.object = object_saliency(props, fm);
            local.object += sw.lap();
        } else {
            cm.object = cv::Mat1f::zeros(va.size);
        }
    }
    local.frames += va.frames;
    if (times) times->add(local);
    return va;
}

Eigen::MatrixXd assemble_frame(const VideoArtifacts& va, int t, int window,
                               const std::array<bool, 3>& cues) {
    const int w = va.size.width;
    const int n = w * va.size.height;
    Eigen::MatrixXd x(3 * (9 + window), n);
    parallel_for(0, n, [&](int i) {
        x.col(i) = assemble_features(va.cues, va.flow, t, i % w, i / w, window, cues);
    });
    return x;
}

std::vector<cv::Mat1f> infer_video(const VideoArtifacts& va, const ModelArtifact& model,
                                   const PipelineConfig& cfg, StageTimes* times) {
    const std::array<bool, 3> enabled = cue_flags(model.cues);
    const int w = va.size.width, h = va.size.height;
    Stopwatch sw;

    std::vector<cv::Mat1f> raw(static_cast<std::size_t>(va.frames));
    for (int t = 0; t < va.frames; ++t) {
        const Eigen::MatrixXd x = assemble_frame(va, t, model.window, enabled);
        const Eigen::VectorXd s = infer_scalar(model.enc, x);
        cv::Mat1f m(h, w);
        for (int i = 0; i < w * h; ++i)
            m(i / w, i % w) = static_cast<float>(s(i));
        raw[static_cast<std::size_t>(t)] = rescale_unit(m);
    }

    const auto smoothed = temporal_smooth(raw, cfg.post);
    std::vector<cv::Mat1f> out(smoothed.size());
    for (std::size_t t = 0; t < smoothed.size(); ++t) {
        const cv::Mat1f enhanced = contrast_enhance(smoothed[t], cfg.post);
        out[t] = binarize_and_clean(enhanced, cfg.post).second;
    }
    if (times) times->encode_post += sw.lap();
    return out;
}

void cmd_extract(const PipelineConfig& cfg, const fs::path& dataset, const fs::path& out,
                 int jobs) {
    const auto videos = scan_dataset(dataset, cfg.max_side);
    for_each_video(jobs, static_cast<int>(videos.size()), [&](int i) {
        const VideoInfo& info = videos[static_cast<std::size_t>(i)];
        const FrameSequence seq = load_resized(info, cfg.max_side);
        const VideoArtifacts va = extract_cues(seq, cfg, info.dir);
        const fs::path dir = out / info.id;
        fs::create_directories(dir);
        for (int t = 0; t < va.frames; ++t) {
            const CueMaps& cm = va.cues[static_cast<std::size_t>(t)];
            write_saliency_map(cm.pixel, dir / frame_name("cue_pixel_", t));
            write_saliency_map(cm.superpixel, dir / frame_name("cue_superpixel_", t));
            write_saliency_map(cm.object, dir / frame_name("cue_object_", t));
        }
    });
    write_json_file(manifest_json("extract", cfg, videos, {}), out / "manifest.json");
}

ModelArtifact cmd_train(const PipelineConfig& cfg, const fs::path& dataset,
                        const fs::path& model_out) {
    const auto videos = scan_dataset(dataset, cfg.max_side);
    ModelArtifact model = train_from_dataset(cfg, videos, nullptr);
    save_model(model, model_out);
    const fs::path dir = model_out.parent_path().empty() ? fs::path(".")
                                                         : model_out.parent_path();
    write_json_file(manifest_json("train", cfg, videos, model_out), dir / "manifest.json");
    return model;
}

void cmd_infer(const PipelineConfig& cfg, const fs::path& dataset, const fs::path& model_path,
               const fs::path& out, int jobs) {
    const ModelArtifact model = load_model(model_path);
    const auto videos = scan_dataset(dataset, cfg.max_side);
    infer_dataset(cfg, model, videos, out, jobs, nullptr, nullptr);
    write_json_file(manifest_json("infer", cfg, videos, model_path), out / "manifest.json");
}

void cmd_run(const PipelineConfig& cfg, const fs::path& dataset, const fs::path& model_path,
             const fs::path& out, int jobs) {
    const auto videos = scan_dataset(dataset, cfg.max_side);
    const fs::path model_file = model_path.empty() ? out / "model.json" : model_path;

    ModelArtifact model;
    std::vector<VideoArtifacts> cache;
    std::vector<VideoArtifacts>* cache_ptr = nullptr;
    if (fs::exists(model_file)) {
        model = load_model(model_file);
    } else {
        long long total_px = 0;
        for (const auto& v : videos)
            total_px += static_cast<long long>(v.frames) * v.proc_size.area();
        if (total_px <= 20'000'000) {
            cache.resize(videos.size());
            cache_ptr = &cache;
        }
        model = train_from_dataset(cfg, videos, cache_ptr);
        fs::create_directories(out);
        save_model(model, model_file);
    }

    infer_dataset(cfg, model, videos, out, jobs, cache_ptr, nullptr);
    write_json_file(manifest_json("run", cfg, videos, model_file), out / "manifest.json");
}

void cmd_annotate(const PipelineConfig& cfg, const fs::path& dataset, const fs::path& out) {
    const auto videos = scan_dataset(dataset, cfg.max_side);
    const fs::path root = out.empty() ? dataset : out;
    fs::create_directories(root);

    std::ofstream scores_csv(root / "scores.csv");
    std::ofstream discards_csv(root / "discards.csv");
    if (!scores_csv || !discards_csv) throw DataError("cannot write under " + root.string());
    scores_csv << "video_id,label,video_score,selected\n";
    discards_csv << "video_id,frame_index,reason\n";

    std::vector<std::vector<cv::Mat1b>> all_masks;
    for (const auto& info : videos) {
        const fs::path frame_dir =
            fs::exists(info.dir / "frames") ? info.dir / "frames" : info.dir;
        cv::Mat first = cv::imread(sorted_pngs(frame_dir).front().string(), cv::IMREAD_COLOR);
        const cv::Size size = first.size();

        const FixationLog fixations = load_fixations(info.dir / "fixations.csv", size);
        const ObjectMaskSet masks = load_object_masks(info.dir / "objects");
        const auto scores = score_objects(masks, fixations, info.fps, size, cfg.density);
        const auto salient = select_salient(scores, cfg.density);
        for (const auto& s : scores) {
            const bool sel = std::find(salient.begin(), salient.end(), s.label) != salient.end();
            scores_csv << info.id << "," << s.label << "," << s.video_score << ","
                       << (sel ? 1 : 0) << "\n";
        }

        const GtEmission gt = emit_gt_masks(masks, salient);
        for (const auto& d : gt.discards)
            discards_csv << info.id << "," << d.frame_index << "," << d.reason << "\n";

        const fs::path gt_dir = root / info.id / "gt";
        fs::create_directories(gt_dir);
        std::vector<cv::Mat1b> video_masks;
        for (const auto& kf : gt.masks) {
            cv::Mat1b m;
            kf.labels.convertTo(m, CV_8U);
            write_binary_mask(m, gt_dir / frame_name("mask_", kf.frame_index));
            video_masks.push_back(m);
        }
        all_masks.push_back(std::move(video_masks));
    }

    bool any = false;
    for (const auto& v : all_masks) any = any || !v.empty();
    if (any) {
        const cv::Mat1f aam = average_annotation_map(all_masks, cv::Size(320, 240));
        write_saliency_map(aam, root / "aam.png");
    }

    const DatasetStats stats = dataset_stats(all_masks);
    json sj;
    sj["keyframes"] = stats.keyframes;
    sj["objects_per_keyframe"]["mean"] = stats.obj_count_mean;
    sj["objects_per_keyframe"]["std"] = stats.obj_count_std;
    sj["object_area_percent"]["mean"] = stats.area_mean;
    sj["object_area_percent"]["std"] = stats.area_std;
    write_json_file(sj, root / "stats.json");
}

void cmd_stats(const fs::path& dataset, const fs::path& out) {
    const auto dirs = list_videos(dataset);
    if (dirs.empty()) throw DataError("no videos under " + dataset.string());
    std::vector<std::vector<cv::Mat1b>> all_masks;
    for (const auto& dir : dirs) {
        const fs::path gt_dir = fs::exists(dir / "gt") ? dir / "gt" : dir;
        std::vector<cv::Mat1b> video;
        for (const auto& kf : load_binary_masks(gt_dir)) {
            cv::Mat1b m;
            kf.labels.convertTo(m, CV_8U);
            video.push_back(m);
        }
        all_masks.push_back(std::move(video));
    }
    const DatasetStats stats = dataset_stats(all_masks);
    json sj;
    sj["keyframes"] = stats.keyframes;
    sj["objects_per_keyframe"]["mean"] = stats.obj_count_mean;
    sj["objects_per_keyframe"]["std"] = stats.obj_count_std;
    sj["object_area_percent"]["mean"] = stats.area_mean;
    sj["object_area_percent"]["std"] = stats.area_std;
    if (out.empty())
        std::printf("%s\n", sj.dump(2).c_str());
    else
        write_json_file(sj, out);
}

void cmd_profile(const PipelineConfig& cfg, const fs::path& dataset, const fs::path& model_path,
                 const fs::path& out) {
    const auto videos = scan_dataset(dataset, cfg.max_side);
    ModelArtifact model;
    if (!model_path.empty() && fs::exists(model_path))
        model = load_model(model_path);
    else
        model = train_from_dataset(cfg, videos, nullptr);

    PipelineConfig eff = cfg;
    eff.window = model.window;
    eff.cues = cue_flags(model.cues);

    StageTimes times;
    Stopwatch total;
    for (const auto& info : videos) {
        const FrameSequence seq = load_resized(info, eff.max_side);
        const VideoArtifacts va = extract_cues(seq, eff, info.dir, &times);
        infer_video(va, model, eff, &times);
    }
    times.total = total.lap();

    const json j = times.per_frame_json();
    if (out.empty())
        std::printf("%s\n", j.dump(2).c_str());
    else
        write_json_file(j, out);
}

}  // namespace vsod
