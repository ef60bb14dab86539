#pragma once

#include "blockboot/bootstrap.hpp"
#include "blockboot/kernels.hpp"
#include "blockboot/process_gen.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace blockboot {

/// Right-continuous step function F(x) = #{samples <= x} / count.
class EmpiricalCDF {
public:
    /// Throws InvalidCdfError on an empty sample.
    explicit EmpiricalCDF(std::vector<double> samples);

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] const std::vector<double>& sorted_samples() const noexcept { return sorted_; }
    [[nodiscard]] std::size_t size() const noexcept { return sorted_.size(); }

private:
    std::vector<double> sorted_;
};

/// sup_x |F_a(x) - F_b(x)|, exact, by merging the two jump sets.
[[nodiscard]] double ks_distance(const EmpiricalCDF& a, const EmpiricalCDF& b);

/// sup_x |F(x) - G(x)| against a continuous distribution function G.
[[nodiscard]] double ks_distance(const EmpiricalCDF& a, const std::function<double(double)>& cdf);

/// Standard normal distribution function.
[[nodiscard]] double normal_cdf(double x);

/// The statistic being bootstrapped: the sample mean or a U-statistic.
struct Statistic {
    enum class Kind { mean, ustat };
    Kind kind = Kind::mean;
    std::optional<Kernel> kernel;

    [[nodiscard]] static Statistic mean() { return {}; }
    [[nodiscard]] static Statistic ustat(Kernel h) { return {Kind::ustat, std::move(h)}; }
    /// "mean" or the kernel name.
    [[nodiscard]] std::string id() const;
};

/// Path source for experiments. Built from a GeneratorSpec, or a test hook.
struct ProcessModel {
    std::string id;
    std::function<std::vector<double>(std::size_t n, std::uint64_t seed)> sample_path;
    std::optional<GeneratorSpec> spec;
    /// Value every path takes when the model is a constant hook.
    std::optional<double> constant;
};

[[nodiscard]] ProcessModel model_from_spec(const GeneratorSpec& spec);
/// Every path is the constant c.
[[nodiscard]] ProcessModel constant_model(double c);

/// theta = E h(X, Y) for independent X, Y with the stationary marginal, where known.
[[nodiscard]] std::optional<double> analytic_theta(const GeneratorSpec& spec, const Kernel& h);

inline constexpr std::size_t kCalibrationLength = 1'000'000;

/// Monte Carlo law of sqrt(n) (statistic - centre) over M independent paths.
struct SamplingDistribution {
    EmpiricalCDF cdf;
    std::vector<double> realizations;  ///< in path order; path m uses derive_seed(seed, m)
    double center = 0.0;
    /// True when the centre came from a calibration path rather than a known value.
    bool center_calibrated = false;
};

/// Requires M >= 100.
[[nodiscard]] SamplingDistribution sampling_distribution(const ProcessModel& model, const Statistic& statistic,
                                                         std::size_t n, std::size_t M, std::uint64_t seed,
                                                         unsigned threads = 1);

struct ExperimentConfig {
    ProcessModel model;
    Statistic statistic;
    std::vector<std::size_t> n_grid;
    ScheduleParams schedule;
    std::size_t B = 2000;
    std::size_t M = 2000;
    std::size_t R = 50;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    /// A warning is recorded for rows where (kp)^2 * B * R exceeds this.
    double work_budget = 1e13;
};

struct ExperimentRow {
    std::string process_id;
    std::string statistic_id;
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t k = 0;
    std::size_t B = 0;
    std::size_t M = 0;
    double ks_distance = 0.0;     ///< median over R paths
    double boot_var_mean = 0.0;   ///< mean over R paths of the exact Var*
    double target_sigma2 = 0.0;
    double wall_time = 0.0;       ///< seconds
    double ks_mean = 0.0;
    std::vector<double> path_ks;  ///< per-path distances, path order
    bool center_calibrated = false;
    /// "analytic" or "monte_carlo" (variance of the sampling realizations).
    std::string target_source;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    std::uint64_t master_seed = 0;
    std::size_t R = 0;
    std::vector<std::string> warnings;
};

/// Estimated work (kp)^2 * B * R that the capacity warning compares with the budget.
[[nodiscard]] double experiment_work(std::size_t n, const ExperimentConfig& config);

/**
 * For each n: M sampling-law paths, then R independent data paths each
 * bootstrapped with B replicates. Seeds depend only on (master seed, n, path
 * index, replicate index), never on grid position, R, M, B or thread count.
 */
[[nodiscard]] ExperimentReport consistency_experiment(const ExperimentConfig& config);

/// `#` metadata lines, then the header
/// process,statistic,n,p,k,B,M,ks_distance,boot_var_mean,target_sigma2,wall_time and one row per n.
/// With include_wall_time = false the wall_time column is written as 0.
void write_report_csv(std::ostream& out, const ExperimentReport& report, bool include_wall_time = true);

struct DegenerateTrendRow {
    std::size_t n = 0;
    std::size_t M = 0;
    double variance = 0.0;     ///< sample variance of sqrt(n) U_n(h2_hat) over paths
    double mean_square = 0.0;  ///< mean of (sqrt(n) U_n(h2_hat))^2
};

/// Per-n Monte Carlo size of the degenerate part of the Hoeffding decomposition.
[[nodiscard]] std::vector<DegenerateTrendRow> degenerate_part_trend(const ProcessModel& model, const Kernel& h,
                                                                    const std::vector<std::size_t>& n_grid,
                                                                    std::size_t M, std::uint64_t seed,
                                                                    unsigned threads = 1);

}  // namespace blockboot
