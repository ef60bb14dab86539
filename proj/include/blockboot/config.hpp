#pragma once

#include "blockboot/bootstrap.hpp"
#include "blockboot/process_gen.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blockboot {

enum class Command { generate, bootstrap, experiment };

[[nodiscard]] std::string to_string(Command command);

/**
 * @brief Fully validated run description.
 *
 * Text form: `key = value` lines, `#` comments, and sections. Keys before any
 * section header are global:
 *
 *     command = experiment          # generate | bootstrap | experiment
 *     seed = 42                     # default 0
 *     output = report.csv           # default "-" (stdout)
 *     [generator]
 *     family = ar1                  # iid_gaussian | ar1 | doubling_map | garch11 | volterra2
 *     n = 4096                      # generate, bootstrap
 *     phi = 0.5                     # ar1
 *     alpha0 = 0.1                  # garch11 (also alpha1, alpha2)
 *     burn_in = 1000                # ar1, garch11 (default 1000)
 *     tail_bits = 64                # doubling_map (default 64)
 *     coeffs = 0:1:1.0, 1:3:0.5     # volterra2, lag1:lag2:g
 *     [bootstrap]
 *     statistic = mean              # mean | gini | variance_half | product
 *     B = 2000
 *     p = 16                        # optional; otherwise the dyadic schedule
 *     eps = 0.333333  c = 1  p_min = 2
 *     [experiment]
 *     n_grid = 512, 2048, 8192
 *     M = 2000
 *     R = 50
 *     budget = 1e13                 # cap on (kp)^2 * B * R
 */
struct RunConfig {
    Command command = Command::generate;
    std::uint64_t seed = 0;
    std::string output = "-";

    GeneratorSpec generator;
    std::size_t n = 0;

    std::string statistic = "mean";
    std::size_t B = 2000;
    std::optional<std::size_t> p;
    ScheduleParams schedule;

    std::vector<std::size_t> n_grid;
    std::size_t M = 2000;
    std::size_t R = 50;
    double budget = 1e13;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parse failure; the message names the offending line(s).
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::size_t line, const std::string& message);
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

[[nodiscard]] RunConfig parse_config(std::string_view text);

/// Canonical text that parse_config maps back to the same RunConfig.
[[nodiscard]] std::string to_config_text(const RunConfig& config);

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> output_override;
    unsigned threads = 1;
    /// Adds a timestamp line and real wall_time values; off gives byte-identical reruns.
    bool timestamp = true;
};

enum ExitCode : int { kExitOk = 0, kExitConfigError = 1, kExitCapacityError = 2 };

/// Executes the command and writes its CSV artifact. Diagnostics go to `err`.
[[nodiscard]] int run(const RunConfig& config, const RunOptions& options, std::ostream& err);

/// Reads, parses and runs a config file, mapping parse errors to exit code 1.
[[nodiscard]] int run_file(const std::string& path, const RunOptions& options, std::ostream& err);

}  // namespace blockboot
