#ifndef VSOD_PIPELINE_HPP
#define VSOD_PIPELINE_HPP

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsod/annotate.hpp"
#include "vsod/encoder.hpp"
#include "vsod/mbd.hpp"
#include "vsod/postproc.hpp"
#include "vsod/smd.hpp"

namespace vsod {

// Cue indices in CueMaps order and `cues.enabled`.
enum CueIndex { kCuePixel = 0, kCueSuperpixel, kCueObject };

struct PipelineConfig {
    int max_side = 400;
    FlowParams flow;
    ChannelParams features;
    PixelCueParams mbd;
    SuperpixelCueParams sp;
    int obj_k = 50;
    std::string obj_provider = "builtin";  // or "files"
    EncoderHyperparams train;
    long long train_n_samples = 500000;
    std::uint64_t train_seed = 1;
    PostprocParams post;
    int window = 1;                                 // temporal neighbors per cue
    std::array<bool, 3> cues = {true, true, true};  // pixel, superpixel, object
    DensityParams density;
};

/// Defaults, overlaid with the JSON file when given. Unknown keys are
/// rejected.
PipelineConfig load_config(const std::filesystem::path& file);

/// Sets one dotted config key from its string form (CLI --set and env
/// overrides funnel through here).
void apply_override(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Fully resolved config snapshot, as stored in the run manifest.
nlohmann::json config_json(const PipelineConfig& cfg);

struct StageTimes {
    double optical_flow = 0, object_proposal = 0, pixel = 0, superpixel = 0, object = 0,
           encode_post = 0, total = 0;  // accumulated seconds
    long frames = 0;

    void add(const StageTimes& other);
    nlohmann::json per_frame_json() const;
};

struct VideoArtifacts {
    std::string video_id;
    cv::Size size;  // processing resolution
    double fps = 30.0;
    int frames = 0;
    std::vector<FlowField> flow;
    std::vector<CueMaps> cues;
};

/// Cue maps and flow for one (already loaded) video. `video_dir` is
/// consulted only by the file-based proposal/fixation providers.
VideoArtifacts extract_cues(const FrameSequence& seq, const PipelineConfig& cfg,
                            const std::filesystem::path& video_dir, StageTimes* times = nullptr);

/// Feature matrix of a whole frame; column y * width + x.
Eigen::MatrixXd assemble_frame(const VideoArtifacts& va, int t, int window,
                               const std::array<bool, 3>& cues);

/// Encoder inference plus post-processing; returns the cleaned per-frame
/// maps that get written to disk.
std::vector<cv::Mat1f> infer_video(const VideoArtifacts& va, const ModelArtifact& model,
                                   const PipelineConfig& cfg, StageTimes* times = nullptr);

// Subcommand drivers. Errors surface as the exception types in
// common.hpp; the CLI maps them to exit codes.
void cmd_extract(const PipelineConfig& cfg, const std::filesystem::path& dataset,
                 const std::filesystem::path& out, int jobs);
ModelArtifact cmd_train(const PipelineConfig& cfg, const std::filesystem::path& dataset,
                        const std::filesystem::path& model_out);
void cmd_infer(const PipelineConfig& cfg, const std::filesystem::path& dataset,
               const std::filesystem::path& model_path, const std::filesystem::path& out,
               int jobs);
void cmd_run(const PipelineConfig& cfg, const std::filesystem::path& dataset,
             const std::filesystem::path& model_path, const std::filesystem::path& out,
             int jobs);
void cmd_annotate(const PipelineConfig& cfg, const std::filesystem::path& dataset,
                  const std::filesystem::path& out);
void cmd_stats(const std::filesystem::path& dataset, const std::filesystem::path& out);
void cmd_profile(const PipelineConfig& cfg, const std::filesystem::path& dataset,
                 const std::filesystem::path& model_path, const std::filesystem::path& out);

}  // namespace vsod

#endif
