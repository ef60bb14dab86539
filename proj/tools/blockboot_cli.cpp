#include "blockboot/config.hpp"
#include "blockboot/version.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Nonoverlapping block bootstrap for means and U-statistics of dependent series"};
    app.set_version_flag("--version", std::string(blockboot::kVersion));

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    unsigned threads = 1;
    bool no_timestamp = false;

    app.add_option("--config", config_path, "Run configuration (key = value with [sections])")->required();
    auto* seed_opt = app.add_option("--seed", seed, "Master seed; overrides the config");
    auto* out_opt = app.add_option("--out", out, "Output CSV path ('-' for stdout); overrides the config");
    app.add_option("--threads", threads, "Worker threads (0 = hardware); never changes results")->check(CLI::NonNegativeNumber);
    app.add_flag("--no-timestamp", no_timestamp, "Omit the timestamp line and zero the wall_time column");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : blockboot::kExitConfigError;
    }

    blockboot::RunOptions options;
    if (*seed_opt) options.seed_override = seed;
    if (*out_opt) options.output_override = out;
    options.threads = threads;
    options.timestamp = !no_timestamp;
    return blockboot::run_file(config_path, options, std::cerr);
}
