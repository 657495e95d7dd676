#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "vsod/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synthetic motion-discrimination suite generator"};

    std::string out;
    vsod::SynthParams params;
    bool annotate_fixture = false;
    app.add_option("--out", out, "dataset root to create")->required();
    app.add_option("--videos", params.videos);
    app.add_option("--frames", params.frames);
    app.add_option("--width", params.size.width);
    app.add_option("--height", params.size.height);
    app.add_option("--stride", params.keyframe_stride, "ground-truth keyframe stride");
    app.add_option("--noise", params.noise, "per-frame noise amplitude, 8-bit counts");
    app.add_option("--seed", params.seed);
    app.add_flag("--annotate-fixture", annotate_fixture,
                 "emit the three-object annotation fixture instead");

    CLI11_PARSE(app, argc, argv);

    try {
        if (annotate_fixture)
            vsod::generate_annotate_fixture(out);
        else
            vsod::generate_suite(out, params);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
