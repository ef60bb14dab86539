#include "blockboot/config.hpp"

#include <doctest.h>

#include <sstream>
#include <string>

using namespace blockboot;

namespace {

std::string error_of(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& haystack, const std::string& needle) { return haystack.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("minimal generate config gets documented defaults") {
    const auto cfg = parse_config("command = generate\n[generator]\nfamily = iid_gaussian\nn = 10\n");
    CHECK(cfg.command == Command::generate);
    CHECK(cfg.seed == 0);
    CHECK(cfg.output == "-");
    CHECK(cfg.n == 10);
    CHECK(cfg.generator.family == Family::iid_gaussian);
    CHECK(cfg.statistic == "mean");
    CHECK(cfg.B == 2000);
    CHECK(cfg.M == 2000);
    CHECK(cfg.R == 50);
    CHECK_FALSE(cfg.p.has_value());
    CHECK(cfg.schedule == ScheduleParams{});
}

TEST_CASE("ar1 defaults and comments") {
    const auto cfg = parse_config(
        "# leading comment\n"
        "command = bootstrap   # trailing comment\n"
        "seed = 42\n"
        "[generator]\nfamily = ar1\nn = 100\nphi = -0.25\n"
        "[bootstrap]\nstatistic = gini\nB = 10\np = 5\n");
    CHECK(cfg.seed == 42);
    CHECK(cfg.generator.phi == -0.25);
    CHECK(cfg.generator.burn_in == 1000);
    CHECK(cfg.statistic == "gini");
    CHECK(cfg.p == 5u);
}

TEST_CASE("stationarity violations cite the bound") {
    const auto msg = error_of("command = generate\n[generator]\nfamily = ar1\nn = 10\nphi = 1.5\n");
    CHECK(contains(msg, "line 5"));
    CHECK(contains(msg, "stationarity"));
    const auto garch = error_of(
        "command = generate\n[generator]\nfamily = garch11\nn = 10\nalpha0 = 0.1\nalpha1 = 0.5\nalpha2 = 0.5\n");
    CHECK(contains(garch, "stationarity"));
}

TEST_CASE("duplicate keys name both lines") {
    const auto msg = error_of("command = generate\n[generator]\nfamily = iid_gaussian\nn = 10\nn = 11\n");
    CHECK(contains(msg, "line 5"));
    CHECK(contains(msg, "line 4"));
}

TEST_CASE("malformed input is rejected with a line number") {
    CHECK(contains(error_of("command = generate\n[generator]\nfamily = iid_gaussian\nn = 10\nsize = 3\n"), "line 5"));
    CHECK(contains(error_of("command = generate\n[gen]\n"), "line 2"));
    CHECK(contains(error_of("command = generate\n[generator]\nfamily = iid_gaussian\nn = ten\n"), "line 4"));
    CHECK(contains(error_of("command = generate\n[generator]\nfamily = iid_gaussian\nn 10\n"), "line 4"));
    CHECK(contains(error_of("command = generate\n[generator]\nfamily = ar1\nn = 10\n"), "phi"));
    CHECK(contains(error_of("command = generate\n[generator]\nfamily = iid_gaussian\nn = 10\nphi = 0.5\n"), "does not apply"));
    CHECK(contains(error_of("command = generate\n[generator]\nfamily = volterra2\nn = 10\ncoeffs = 1:1:0.5\n"), "diagonal"));
    CHECK(contains(error_of("command = experiment\n[generator]\nfamily = iid_gaussian\n[experiment]\nn_grid = 64, 32\n"),
                   "increasing"));
    CHECK(contains(error_of("command = experiment\n[generator]\nfamily = iid_gaussian\n[experiment]\nn_grid = 64\nM = 50\n"),
                   "line 6"));
    CHECK_FALSE(error_of("command = generate\n").empty());
}

TEST_CASE("canonical text round-trips") {
    const char* texts[] = {
        "command = generate\nseed = 3\noutput = out.csv\n[generator]\nfamily = doubling_map\nn = 100\ntail_bits = 40\n",
        "command = generate\n[generator]\nfamily = volterra2\nn = 50\ncoeffs = 0:1:1.0, 1:3:-0.5\n",
        "command = generate\n[generator]\nfamily = garch11\nn = 50\nalpha0 = 0.1\nalpha1 = 0.1\nalpha2 = 0.8\nburn_in = 7\n",
        "command = bootstrap\nseed = 9\n[generator]\nfamily = ar1\nn = 300\nphi = 0.3\n"
        "[bootstrap]\nstatistic = variance_half\nB = 17\neps = 0.25\nc = 2\np_min = 3\n",
        "command = experiment\nseed = 1\n[generator]\nfamily = ar1\nphi = 0.1\n[bootstrap]\nstatistic = gini\nB = 30\n"
        "[experiment]\nn_grid = 32, 64\nM = 100\nR = 2\nbudget = 5e9\n",
    };
    for (const char* text : texts) {
        const auto cfg = parse_config(text);
        const auto canonical = to_config_text(cfg);
        CHECK(parse_config(canonical) == cfg);
        CHECK(to_config_text(parse_config(canonical)) == canonical);
    }
}

TEST_CASE("run maps a short series to the partition exit code") {
    auto cfg = parse_config("command = bootstrap\n[generator]\nfamily = iid_gaussian\nn = 4\n[bootstrap]\np = 8\n");
    std::ostringstream err;
    RunOptions options;
    options.output_override = "/dev/null";
    CHECK(run(cfg, options, err) == kExitConfigError);
    CHECK(contains(err.str(), "partition"));
}

TEST_CASE("run_file reports unreadable files") {
    std::ostringstream err;
    CHECK(run_file("/nonexistent/config.ini", {}, err) == kExitConfigError);
    CHECK_FALSE(err.str().empty());
}
