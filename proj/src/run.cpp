#include "blockboot/config.hpp"

#include "blockboot/bootstrap.hpp"
#include "blockboot/empirics.hpp"
#include "blockboot/errors.hpp"
#include "blockboot/rng.hpp"
#include "blockboot/version.hpp"

#include <fmt/format.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace blockboot {

namespace {

constexpr std::uint64_t kTagSeries = 0;
constexpr std::uint64_t kTagResample = 1;

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_header(std::ostream& out, const RunConfig& cfg, const RunOptions& options) {
    out << "# blockboot_version=" << kVersion << '\n';
    if (options.timestamp) out << "# timestamp=" << utc_timestamp() << '\n';
    out << "# command=" << to_string(cfg.command) << '\n';
    out << "# master_seed=" << cfg.seed << '\n';
    std::istringstream echo(to_config_text(cfg));
    for (std::string line; std::getline(echo, line);) out << "# config: " << line << '\n';
}

Statistic statistic_for(const std::string& id) {
    if (id == "mean") return Statistic::mean();
    return Statistic::ustat(*builtin_kernel(id));
}

void run_generate(std::ostream& out, const RunConfig& cfg) {
    write_series_csv(out, generate(cfg.generator, cfg.n, cfg.seed));
}

void run_bootstrap(std::ostream& out, const RunConfig& cfg, const RunOptions& options) {
    const auto series = generate(cfg.generator, cfg.n, derive_seed(cfg.seed, kTagSeries));
    const std::size_t p = cfg.p ? *cfg.p : schedule_block_length(cfg.n, cfg.schedule);
    const BlockPartition part(cfg.n, p);
    const std::uint64_t boot_seed = derive_seed(cfg.seed, kTagResample);
    const PivotOptions pivot_options{options.threads, Centering::automatic};
    const auto dist = cfg.statistic == "mean"
                          ? boot_mean_pivot(series, part, cfg.B, boot_seed, pivot_options)
                          : boot_ustat_pivot(series, part, *builtin_kernel(cfg.statistic), cfg.B, boot_seed, pivot_options);
    write_bootstrap_csv(out, dist);
}

void run_experiment(std::ostream& out, const RunConfig& cfg, const RunOptions& options, std::ostream& err) {
    ExperimentConfig ec;
    ec.model = model_from_spec(cfg.generator);
    ec.statistic = statistic_for(cfg.statistic);
    ec.n_grid = cfg.n_grid;
    ec.schedule = cfg.schedule;
    ec.B = cfg.B;
    ec.M = cfg.M;
    ec.R = cfg.R;
    ec.seed = cfg.seed;
    ec.threads = options.threads;
    ec.work_budget = cfg.budget;
    for (std::size_t n : cfg.n_grid) {
        const double work = experiment_work(n, ec);
        if (work > cfg.budget) {
            throw CapacityError(fmt::format("n = {}: estimated work (kp)^2*B*R = {:.3g} exceeds budget {:.3g}", n, work,
                                            cfg.budget));
        }
    }
    const auto report = consistency_experiment(ec);
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    write_report_csv(out, report, options.timestamp);
}

}  // namespace

int run(const RunConfig& config, const RunOptions& options, std::ostream& err) {
    RunConfig cfg = config;
    if (options.seed_override) cfg.seed = *options.seed_override;
    if (options.output_override) cfg.output = *options.output_override;

    std::ostringstream body;
    try {
        write_header(body, cfg, options);
        switch (cfg.command) {
            case Command::generate: run_generate(body, cfg); break;
            case Command::bootstrap: run_bootstrap(body, cfg, options); break;
            case Command::experiment: run_experiment(body, cfg, options, err); break;
        }
    } catch (const CapacityError& e) {
        err << "capacity error: " << e.what() << '\n';
        return kExitCapacityError;
    } catch (const InvalidPartitionError& e) {
        err << "invalid partition: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }

    if (cfg.output == "-") {
        std::cout << body.str() << std::flush;
        return kExitOk;
    }
    std::ofstream file(cfg.output, std::ios::binary | std::ios::trunc);
    if (!file) {
        err << "error: cannot open output path '" << cfg.output << "'\n";
        return kExitConfigError;
    }
    file << body.str();
    if (!file) {
        err << "error: failed writing '" << cfg.output << "'\n";
        return kExitConfigError;
    }
    return kExitOk;
}

int run_file(const std::string& path, const RunOptions& options, std::ostream& err) {
    std::ifstream in(path);
    if (!in) {
        err << "error: cannot read config '" << path << "'\n";
        return kExitConfigError;
    }
    std::stringstream text;
    text << in.rdbuf();
    RunConfig cfg;
    try {
        cfg = parse_config(text.str());
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    return run(cfg, options, err);
}

}  // namespace blockboot
