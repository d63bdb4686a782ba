#include "evi/run.hpp"
#include "evi/runconfig.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <streambuf>
#include <string>

namespace {

struct NullBuffer : std::streambuf {
    int overflow(int c) override { return c; }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time stepper and control optimizer for constrained parabolic problems"};
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--seed", seed, "seed (overrides config)");
    app.add_flag("--quiet", quiet, "suppress the summary");
    CLI11_PARSE(app, argc, argv);

    std::ifstream file(config_path, std::ios::binary);
    if (!file) {
        std::cerr << "error: cannot read config file '" << config_path << "'\n";
        return 2;
    }
    std::ostringstream text;
    text << file.rdbuf();

    evi::RunConfig cfg;
    try {
        cfg = evi::parse_config_json(text.str());
    } catch (const evi::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (!out_dir.empty()) {
        cfg.out_dir = out_dir;
    }
    if (seed) {
        cfg.seed = *seed;
    }

    NullBuffer null_buffer;
    std::ostream null_stream(&null_buffer);
    return evi::run_command(cfg, quiet ? null_stream : std::cout);
}
