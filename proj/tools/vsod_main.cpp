#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vsod/eval.hpp"
#include "vsod/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

vsod::PipelineConfig resolve_config(const std::string& config_file,
                                    const std::vector<std::string>& sets) {
    vsod::PipelineConfig cfg = vsod::load_config(config_file.empty() ? fs::path()
                                                                     : fs::path(config_file));
    if (const char* env = std::getenv("VSOD_SEED")) vsod::apply_override(cfg, "train.seed", env);
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw vsod::ConfigError("--set expects key=value, got '" + kv + "'");
        vsod::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"video salient object detection pipeline"};
    app.require_subcommand(1);

    std::string config_file;
    std::vector<std::string> sets;
    int jobs = 1;
    int threads = 0;
    app.add_option("--config", config_file, "pipeline config JSON")->expected(1);
    app.add_option("--set", sets, "override a config key (key=value), repeatable");
    app.add_option("--jobs", jobs, "videos processed in parallel");
    app.add_option("--threads", threads, "kernel threads (0 = all cores)");

    std::string dataset, out, model, gt, pred;
    bool curves = false;

    CLI::App* c_extract = app.add_subcommand("extract", "write per-frame cue maps");
    c_extract->add_option("--dataset", dataset)->required();
    c_extract->add_option("--out", out)->required();

    CLI::App* c_train = app.add_subcommand("train", "train the encoder stack");
    c_train->add_option("--dataset", dataset)->required();
    c_train->add_option("--model", model)->required();

    CLI::App* c_infer = app.add_subcommand("infer", "saliency maps from a trained model");
    c_infer->add_option("--dataset", dataset)->required();
    c_infer->add_option("--model", model)->required();
    c_infer->add_option("--out", out)->required();

    CLI::App* c_run = app.add_subcommand("run", "train if needed, then infer");
    c_run->add_option("--dataset", dataset)->required();
    c_run->add_option("--out", out)->required();
    c_run->add_option("--model", model, "model file (default <out>/model.json)");

    CLI::App* c_annotate = app.add_subcommand("annotate", "fixation-based ground-truth masks");
    c_annotate->add_option("--dataset", dataset)->required();
    c_annotate->add_option("--out", out, "output root (default: the dataset)");

    CLI::App* c_eval = app.add_subcommand("eval", "score maps against ground truth");
    c_eval->add_option("--gt", gt)->required();
    c_eval->add_option("--pred", pred)->required();
    c_eval->add_option("--out", out)->required();
    c_eval->add_flag("--curves", curves, "also write 256-threshold PR curves");

    CLI::App* c_stats = app.add_subcommand("stats", "ground-truth dataset statistics");
    c_stats->add_option("--dataset", dataset)->required();
    c_stats->add_option("--out", out, "output JSON (default: stdout)");

    CLI::App* c_profile = app.add_subcommand("profile", "per-stage timing report");
    c_profile->add_option("--dataset", dataset)->required();
    c_profile->add_option("--model", model, "reuse a trained model");
    c_profile->add_option("--out", out, "output JSON (default: stdout)");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }

    try {
        vsod::set_num_threads(threads);
        const vsod::PipelineConfig cfg = resolve_config(config_file, sets);
        if (c_extract->parsed()) {
            vsod::cmd_extract(cfg, dataset, out, jobs);
        } else if (c_train->parsed()) {
            vsod::cmd_train(cfg, dataset, model);
        } else if (c_infer->parsed()) {
            vsod::cmd_infer(cfg, dataset, model, out, jobs);
        } else if (c_run->parsed()) {
            vsod::cmd_run(cfg, dataset, model, out, jobs);
        } else if (c_annotate->parsed()) {
            vsod::cmd_annotate(cfg, dataset, out);
        } else if (c_eval->parsed()) {
            std::vector<vsod::CurvePoint> curve_points;
            const vsod::EvalReport report =
                vsod::evaluate_directories(gt, pred, 0.3, curves ? &curve_points : nullptr);
            vsod::write_report(report, out);
            if (curves) {
                fs::path cp(out);
                cp.replace_extension("");
                vsod::write_curves(curve_points, cp.string() + "_curves.csv");
            }
            std::printf("MAP %.4f MAR %.4f Fbeta %.4f MAE %.4f over %zu videos\n", report.map,
                        report.mar, report.f_beta, report.mae, report.per_video.size());
        } else if (c_stats->parsed()) {
            vsod::cmd_stats(dataset, out);
        } else if (c_profile->parsed()) {
            vsod::cmd_profile(cfg, dataset, model, out);
        }
    } catch (const vsod::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const vsod::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const vsod::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
