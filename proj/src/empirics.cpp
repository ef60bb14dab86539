#include "blockboot/empirics.hpp"

#include "blockboot/errors.hpp"
#include "blockboot/parallel.hpp"
#include "blockboot/rng.hpp"
#include "blockboot/version.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace blockboot {

namespace {

// Seed-tree labels.
constexpr std::uint64_t kTagSampling = 1;
constexpr std::uint64_t kTagPaths = 2;
constexpr std::uint64_t kTagBootstrap = 3;
constexpr std::uint64_t kTagCalibration = 4;
constexpr std::uint64_t kTagDegenerate = 5;

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

double statistic_value(const Statistic& statistic, std::span<const double> xs) {
    if (statistic.kind == Statistic::Kind::mean) {
        return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    }
    return u_statistic(xs, *statistic.kernel);
}

struct Centre {
    double value = 0.0;
    bool calibrated = false;
};

Centre find_centre(const ProcessModel& model, const Statistic& statistic, std::uint64_t seed) {
    const bool is_mean = statistic.kind == Statistic::Kind::mean;
    if (model.constant) {
        const double c = *model.constant;
        return {is_mean ? c : statistic.kernel->eval(c, c), false};
    }
    if (model.spec) {
        if (is_mean) return {stationary_mean(*model.spec), false};
        if (auto theta = analytic_theta(*model.spec, *statistic.kernel)) return {*theta, false};
    }
    const std::uint64_t calib = derive_seed(seed, kTagCalibration);
    const auto path = model.sample_path(kCalibrationLength, calib);
    if (is_mean || statistic.kernel->id != KernelId::custom) return {statistic_value(statistic, path), true};
    // Custom kernels: average h over pairs drawn from two independent paths, O(length).
    const auto other = model.sample_path(kCalibrationLength, derive_seed(calib, 1));
    double total = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) total += statistic.kernel->eval(path[i], other[i]);
    return {total / static_cast<double>(path.size()), true};
}

}  // namespace

EmpiricalCDF::EmpiricalCDF(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw InvalidCdfError("empirical CDF needs at least one sample");
    for (double v : sorted_) {
        if (std::isnan(v)) throw InvalidCdfError("empirical CDF sample is NaN");
    }
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCDF::operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_distance(const EmpiricalCDF& a, const EmpiricalCDF& b) {
    const auto& xa = a.sorted_samples();
    const auto& xb = b.sorted_samples();
    const double na = static_cast<double>(xa.size());
    const double nb = static_cast<double>(xb.size());
    std::size_t i = 0, j = 0;
    double sup = 0.0;
    while (i < xa.size() || j < xb.size()) {
        double x;
        if (i == xa.size()) x = xb[j];
        else if (j == xb.size()) x = xa[i];
        else x = std::min(xa[i], xb[j]);
        while (i < xa.size() && xa[i] <= x) ++i;
        while (j < xb.size() && xb[j] <= x) ++j;
        sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return sup;
}

double ks_distance(const EmpiricalCDF& a, const std::function<double(double)>& cdf) {
    const auto& xs = a.sorted_samples();
    const double n = static_cast<double>(xs.size());
    double sup = 0.0;
    std::size_t i = 0;
    while (i < xs.size()) {
        const double x = xs[i];
        const double before = static_cast<double>(i) / n;
        while (i < xs.size() && xs[i] == x) ++i;
        const double after = static_cast<double>(i) / n;
        const double g = cdf(x);
        sup = std::max({sup, std::abs(after - g), std::abs(before - g)});
    }
    return sup;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::string Statistic::id() const { return kind == Kind::mean ? std::string("mean") : kernel->name; }

ProcessModel model_from_spec(const GeneratorSpec& spec) {
    spec.validate();
    ProcessModel m;
    m.id = to_string(spec.family);
    m.spec = spec;
    m.sample_path = [spec](std::size_t n, std::uint64_t seed) {
        const auto series = generate(spec, n, seed);
        return std::vector<double>(series.values().begin(), series.values().end());
    };
    return m;
}

ProcessModel constant_model(double c) {
    ProcessModel m;
    m.id = "constant";
    m.constant = c;
    m.sample_path = [c](std::size_t n, std::uint64_t) { return std::vector<double>(n, c); };
    return m;
}

std::optional<double> analytic_theta(const GeneratorSpec& spec, const Kernel& h) {
    if (h.id == KernelId::custom) return std::nullopt;
    const double mean = stationary_mean(spec);
    const double var = stationary_variance(spec);
    switch (h.id) {
        case KernelId::variance_half: return var;
        case KernelId::product: return mean * mean;
        case KernelId::gini:
            if (spec.family == Family::iid_gaussian || spec.family == Family::ar1) {
                // E|X - Y| = 2 sd / sqrt(pi) for independent normals.
                return 2.0 * std::sqrt(var) / std::sqrt(std::numbers::pi);
            }
            if (spec.family == Family::doubling_map) return 1.0 / 3.0;  // uniform(0,1) marginal
            return std::nullopt;
        case KernelId::custom: break;
    }
    return std::nullopt;
}

SamplingDistribution sampling_distribution(const ProcessModel& model, const Statistic& statistic, std::size_t n,
                                           std::size_t M, std::uint64_t seed, unsigned threads) {
    if (M < 100) throw std::invalid_argument(fmt::format("sampling_distribution needs M >= 100, got {}", M));
    if (statistic.kind == Statistic::Kind::ustat && n < 2) {
        throw InsufficientSampleError("U-statistic sampling distribution needs n >= 2");
    }
    if (n == 0) throw InvalidLengthError("sampling_distribution needs n >= 1");
    const Centre centre = find_centre(model, statistic, seed);
    const double root_n = std::sqrt(static_cast<double>(n));
    std::vector<double> realizations(M);
    parallel_for(M, threads, [&](std::size_t m) {
        const auto path = model.sample_path(n, derive_seed(seed, m));
        realizations[m] = root_n * (statistic_value(statistic, path) - centre.value);
    });
    EmpiricalCDF cdf(realizations);
    return {std::move(cdf), std::move(realizations), centre.value, centre.calibrated};
}

double experiment_work(std::size_t n, const ExperimentConfig& config) {
    const std::size_t p = schedule_block_length(n, config.schedule);
    const double kp = static_cast<double>((n / p) * p);
    return kp * kp * static_cast<double>(config.B) * static_cast<double>(config.R);
}

ExperimentReport consistency_experiment(const ExperimentConfig& config) {
    if (config.n_grid.empty()) throw std::invalid_argument("experiment needs a nonempty n_grid");
    for (std::size_t i = 1; i < config.n_grid.size(); ++i) {
        if (config.n_grid[i] <= config.n_grid[i - 1]) throw std::invalid_argument("n_grid must be strictly increasing");
    }
    if (config.B == 0 || config.M == 0 || config.R == 0) throw std::invalid_argument("B, M and R must be positive");
    if (config.statistic.kind == Statistic::Kind::ustat && !config.statistic.kernel) {
        throw std::invalid_argument("U-statistic experiment needs a kernel");
    }
    config.schedule.validate();

    ExperimentReport report;
    report.master_seed = config.seed;
    report.R = config.R;
    const bool is_mean = config.statistic.kind == Statistic::Kind::mean;

    for (std::size_t n : config.n_grid) {
        const auto start = std::chrono::steady_clock::now();
        const std::size_t p = schedule_block_length(n, config.schedule);
        const BlockPartition part(n, p);
        if (experiment_work(n, config) > config.work_budget) {
            report.warnings.push_back(fmt::format("n={}: estimated work (kp)^2*B*R = {:.3g} exceeds budget {:.3g}", n,
                                                  experiment_work(n, config), config.work_budget));
        }

        const auto truth = sampling_distribution(config.model, config.statistic, n, config.M,
                                                 derive_seed(derive_seed(config.seed, kTagSampling), n),
                                                 config.threads);

        std::vector<double> path_ks(config.R);
        std::vector<double> path_var(config.R);
        const std::uint64_t paths_seed = derive_seed(derive_seed(config.seed, kTagPaths), n);
        parallel_for(config.R, config.threads, [&](std::size_t r) {
            const std::uint64_t path_seed = derive_seed(paths_seed, r);
            const TimeSeries series(config.model.sample_path(n, path_seed), config.model.spec, path_seed);
            const std::uint64_t boot_seed = derive_seed(path_seed, kTagBootstrap);
            const BootstrapDistribution dist =
                is_mean ? boot_mean_pivot(series, part, config.B, boot_seed)
                        : boot_ustat_pivot(series, part, *config.statistic.kernel, config.B, boot_seed);
            path_ks[r] = ks_distance(EmpiricalCDF(dist.pivot_values), truth.cdf);
            path_var[r] = dist.exact_variance.value_or(0.0);
        });

        ExperimentRow row;
        row.process_id = config.model.id;
        row.statistic_id = config.statistic.id();
        row.n = n;
        row.p = p;
        row.k = part.k();
        row.B = config.B;
        row.M = config.M;
        row.ks_distance = median_of(path_ks);
        row.ks_mean = mean_of(path_ks);
        row.boot_var_mean = mean_of(path_var);
        row.center_calibrated = truth.center_calibrated;
        if (is_mean && config.model.spec) {
            row.target_sigma2 = long_run_variance(*config.model.spec);
            row.target_source = "analytic";
        } else {
            row.target_sigma2 = sample_variance(truth.realizations);
            row.target_source = "monte_carlo";
        }
        row.path_ks = std::move(path_ks);
        row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report, bool include_wall_time) {
    out << "# blockboot_version=" << kVersion << '\n';
    out << "# master_seed=" << report.master_seed << '\n';
    out << "# R=" << report.R << '\n';
    for (const auto& row : report.rows) {
        out << fmt::format("# row n={} ks_mean={:.17g} center_calibrated={} target_source={}\n", row.n, row.ks_mean,
                           row.center_calibrated ? "true" : "false", row.target_source);
    }
    for (const auto& w : report.warnings) out << "# warning: " << w << '\n';
    out << "process,statistic,n,p,k,B,M,ks_distance,boot_var_mean,target_sigma2,wall_time\n";
    for (const auto& row : report.rows) {
        out << fmt::format("{},{},{},{},{},{},{},{:.17g},{:.17g},{:.17g},{:.6f}\n", row.process_id, row.statistic_id,
                           row.n, row.p, row.k, row.B, row.M, row.ks_distance, row.boot_var_mean, row.target_sigma2,
                           include_wall_time ? row.wall_time : 0.0);
    }
}

std::vector<DegenerateTrendRow> degenerate_part_trend(const ProcessModel& model, const Kernel& h,
                                                      const std::vector<std::size_t>& n_grid, std::size_t M,
                                                      std::uint64_t seed, unsigned threads) {
    if (n_grid.empty()) throw std::invalid_argument("degenerate_part_trend needs a nonempty n_grid");
    if (M < 2) throw std::invalid_argument("degenerate_part_trend needs M >= 2");
    std::vector<DegenerateTrendRow> rows;
    for (std::size_t n : n_grid) {
        if (n < 2) throw InsufficientSampleError("degenerate_part_trend needs n >= 2");
        const std::uint64_t n_seed = derive_seed(derive_seed(seed, kTagDegenerate), n);
        const double root_n = std::sqrt(static_cast<double>(n));
        std::vector<double> values(M);
        parallel_for(M, threads, [&](std::size_t m) {
            const auto path = model.sample_path(n, derive_seed(n_seed, m));
            values[m] = root_n * degenerate_u_statistic(h, path);
        });
        DegenerateTrendRow row;
        row.n = n;
        row.M = M;
        row.variance = sample_variance(values);
        double sq = 0.0;
        for (double v : values) sq += v * v;
        row.mean_square = sq / static_cast<double>(M);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace blockboot
