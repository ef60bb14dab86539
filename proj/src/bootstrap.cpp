#include "blockboot/bootstrap.hpp"

#include "blockboot/errors.hpp"
#include "blockboot/parallel.hpp"
#include "blockboot/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace blockboot {

void ScheduleParams::validate() const {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument(fmt::format("schedule eps must lie in (0,1), got {}", eps));
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument(fmt::format("schedule c must be positive, got {}", c));
    if (p_min < 2) throw std::invalid_argument(fmt::format("schedule p_min must be at least 2, got {}", p_min));
}

std::size_t schedule_block_length(std::size_t n, const ScheduleParams& params) {
    params.validate();
    if (n < 2) throw InvalidLengthError("block-length schedule needs n >= 2");
    // l with 2^l < n <= 2^(l+1)
    int l = 0;
    while ((std::size_t{2} << l) < n) ++l;
    const double base = std::ldexp(1.0, l);
    const double target = params.c * std::pow(base, params.eps);
    auto p = static_cast<std::size_t>(std::floor(target));
    // pow can land one ulp below an exact integer (64^(1/3) = 3.9999999999999996).
    if (static_cast<double>(p + 1) <= target * (1.0 + 1e-12)) ++p;
    return std::max(params.p_min, p);
}

BlockPartition::BlockPartition(std::size_t n, std::size_t p) : n_(n), p_(p), k_(0) {
    if (p == 0) throw InvalidPartitionError("block length p must be at least 1");
    if (p > n) throw InvalidPartitionError(fmt::format("block length p = {} exceeds series length n = {}", p, n));
    k_ = n / p;
}

std::vector<IndexRange> BlockPartition::blocks() const {
    std::vector<IndexRange> out;
    out.reserve(k_);
    for (std::size_t i = 0; i < k_; ++i) out.push_back(block(i));
    return out;
}

void BlockPartition::check_matches(std::size_t series_length) const {
    if (series_length != n_) {
        throw InvalidPartitionError(
            fmt::format("partition built for n = {} but series has length {}", n_, series_length));
    }
}

BlockPartition partition(std::size_t n, std::size_t p) { return BlockPartition(n, p); }

namespace {

void draw_into(const BlockPartition& part, std::uint64_t seed, std::uint64_t replicate, std::vector<std::size_t>& out) {
    Stream stream(seed, replicate);
    out.resize(part.k());
    for (auto& b : out) b = static_cast<std::size_t>(stream.below(part.k()));
}

std::vector<double> block_sums(std::span<const double> values, const BlockPartition& part) {
    std::vector<double> sums(part.k());
    for (std::size_t b = 0; b < part.k(); ++b) {
        const auto r = part.block(b);
        sums[b] = std::accumulate(values.begin() + static_cast<std::ptrdiff_t>(r.begin),
                                  values.begin() + static_cast<std::ptrdiff_t>(r.end), 0.0);
    }
    return sums;
}

std::span<const double> block_view(std::span<const double> values, const BlockPartition& part, std::size_t b) {
    const auto r = part.block(b);
    return values.subspan(r.begin, r.size());
}

void require_pairs(const BlockPartition& part) {
    if (part.used() < 2) throw InsufficientSampleError("bootstrapped U-statistic needs kp >= 2");
}

}  // namespace

std::vector<std::size_t> draw_blocks(const BlockPartition& part, std::uint64_t seed, std::uint64_t replicate) {
    std::vector<std::size_t> draws;
    draw_into(part, seed, replicate, draws);
    return draws;
}

std::vector<double> resample_with_draws(std::span<const double> values, const BlockPartition& part,
                                        std::span<const std::size_t> draws) {
    part.check_matches(values.size());
    if (draws.size() != part.k()) {
        throw InvalidPartitionError(fmt::format("expected {} block draws, got {}", part.k(), draws.size()));
    }
    std::vector<double> out;
    out.reserve(part.used());
    for (std::size_t b : draws) {
        if (b >= part.k()) throw InvalidPartitionError(fmt::format("block index {} out of range", b));
        const auto block = block_view(values, part, b);
        out.insert(out.end(), block.begin(), block.end());
    }
    return out;
}

std::vector<double> resample(const TimeSeries& series, const BlockPartition& part, std::uint64_t draw_seed) {
    part.check_matches(series.size());
    const auto draws = draw_blocks(part, draw_seed, 0);
    return resample_with_draws(series.values(), part, draws);
}

MeanMoments boot_mean_exact_moments(std::span<const double> values, const BlockPartition& part) {
    part.check_matches(values.size());
    const double kp = static_cast<double>(part.used());
    const auto sums = block_sums(values, part);
    const double mean = std::accumulate(sums.begin(), sums.end(), 0.0) / kp;
    const double p = static_cast<double>(part.p());
    double ss = 0.0;
    for (double s : sums) ss += (s - p * mean) * (s - p * mean);
    return {mean, ss / kp};
}

MeanMoments boot_mean_exact_moments(const TimeSeries& series, const BlockPartition& part) {
    return boot_mean_exact_moments(series.values(), part);
}

BootstrapDistribution boot_mean_pivot(const TimeSeries& series, const BlockPartition& part, std::size_t B,
                                      std::uint64_t seed, const PivotOptions& options) {
    part.check_matches(series.size());
    if (B == 0) throw std::invalid_argument("bootstrap needs B >= 1 replicates");
    const auto values = series.values();
    const MeanMoments moments = boot_mean_exact_moments(values, part);

    // Centered block sums S_b - p * mean; a replicate sums k of them.
    std::vector<double> centered = block_sums(values, part);
    const double p = static_cast<double>(part.p());
    for (auto& s : centered) s -= p * moments.expectation;
    const double scale = 1.0 / std::sqrt(static_cast<double>(part.used()));

    BootstrapDistribution dist;
    dist.pivot_values.resize(B);
    parallel_for(B, options.threads, [&](std::size_t r) {
        Stream stream(seed, r);
        double total = 0.0;
        for (std::size_t slot = 0; slot < part.k(); ++slot) total += centered[stream.below(part.k())];
        dist.pivot_values[r] = total * scale;
    });
    dist.exact_expectation = moments.expectation;
    dist.exact_variance = moments.scaled_variance;
    dist.meta = {"mean", part.n(), part.p(), part.k(), B, seed, "exact"};
    return dist;
}

double boot_ustat_exact_expectation(std::span<const double> values, const BlockPartition& part, const Kernel& h) {
    part.check_matches(values.size());
    require_pairs(part);
    const auto used = values.first(part.used());
    const double k = static_cast<double>(part.k());
    const double kp = static_cast<double>(part.used());

    double within = 0.0;
    for (std::size_t b = 0; b < part.k(); ++b) within += pair_sum(h, block_view(values, part, b));
    const double full = 2.0 * pair_sum(h, used) + diagonal_sum(h, used);
    return 2.0 / (kp * (kp - 1.0)) * (within + (k - 1.0) / (2.0 * k) * full);
}

double boot_ustat_exact_expectation(const TimeSeries& series, const BlockPartition& part, const Kernel& h) {
    return boot_ustat_exact_expectation(series.values(), part, h);
}

double boot_ustat_exact_variance(std::span<const double> values, const BlockPartition& part, const Kernel& h) {
    part.check_matches(values.size());
    require_pairs(part);
    const std::size_t k = part.k();
    const double kd = static_cast<double>(k);

    // Per-block sorted copies let the builtin cross sums skip their sort.
    std::vector<std::vector<double>> blocks(k);
    for (std::size_t b = 0; b < k; ++b) {
        const auto v = block_view(values, part, b);
        blocks[b].assign(v.begin(), v.end());
        std::sort(blocks[b].begin(), blocks[b].end());
    }

    // Sum of pairs of U* = sum_slots f(b) + sum_{slot pairs} g(b, b').
    std::vector<double> f(k);
    std::vector<double> g(k * k);
    for (std::size_t b = 0; b < k; ++b) {
        f[b] = pair_sum(h, blocks[b]);
        for (std::size_t c = b; c < k; ++c) {
            const double v = cross_sum(h, blocks[b], blocks[c]);
            g[b * k + c] = v;
            g[c * k + b] = v;
        }
    }

    const double f_mean = std::accumulate(f.begin(), f.end(), 0.0) / kd;
    std::vector<double> g1(k);
    for (std::size_t b = 0; b < k; ++b) {
        g1[b] = std::accumulate(g.begin() + static_cast<std::ptrdiff_t>(b * k),
                                g.begin() + static_cast<std::ptrdiff_t>((b + 1) * k), 0.0) / kd;
    }
    const double g_mean = std::accumulate(g1.begin(), g1.end(), 0.0) / kd;

    double var_f = 0.0, cov_f_g1 = 0.0, var_g1 = 0.0, var_g = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
        var_f += (f[b] - f_mean) * (f[b] - f_mean);
        cov_f_g1 += (f[b] - f_mean) * (g1[b] - g_mean);
        var_g1 += (g1[b] - g_mean) * (g1[b] - g_mean);
        for (std::size_t c = 0; c < k; ++c) var_g += (g[b * k + c] - g_mean) * (g[b * k + c] - g_mean);
    }
    var_f /= kd;
    cov_f_g1 /= kd;
    var_g1 /= kd;
    var_g /= kd * kd;

    const double slot_pairs = kd * (kd - 1.0) / 2.0;
    const double var_total = kd * var_f + slot_pairs * var_g + kd * (kd - 1.0) * (kd - 2.0) * var_g1 +
                             2.0 * kd * (kd - 1.0) * cov_f_g1;
    const double kp = static_cast<double>(part.used());
    const double norm = kp * (kp - 1.0) / 2.0;
    return std::max(0.0, kp * var_total / (norm * norm));
}

BootstrapDistribution boot_ustat_pivot(const TimeSeries& series, const BlockPartition& part, const Kernel& h,
                                       std::size_t B, std::uint64_t seed, const PivotOptions& options) {
    part.check_matches(series.size());
    require_pairs(part);
    if (B == 0) throw std::invalid_argument("bootstrap needs B >= 1 replicates");
    const auto values = series.values();
    const std::size_t kp = part.used();
    const double pairs = static_cast<double>(kp) * static_cast<double>(kp - 1) / 2.0;
    const double scale = std::sqrt(static_cast<double>(kp));

    bool exact = true;
    if (options.centering == Centering::monte_carlo) exact = false;
    if (options.centering == Centering::automatic && h.id == KernelId::custom && kp > kMonteCarloCenteringThreshold) {
        exact = false;
    }

    std::vector<double> u_star(B);
    if (h.id == KernelId::custom) {
        parallel_for(B, options.threads, [&](std::size_t r) {
            std::vector<std::size_t> draws;
            draw_into(part, seed, r, draws);
            const auto sample = resample_with_draws(values, part, draws);
            u_star[r] = pair_sum(h, sample) / pairs;
        });
    } else {
        // A replicate is a multiset of original observations: element i of the
        // first kp appears m_{block(i)} times. Pre-sorting once keeps each
        // replicate linear in kp.
        std::vector<std::size_t> order(kp);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<double> sorted(kp);
        std::vector<std::size_t> block_of(kp);
        for (std::size_t i = 0; i < kp; ++i) {
            sorted[i] = values[order[i]];
            block_of[i] = order[i] / part.p();
        }
        parallel_for(B, options.threads, [&](std::size_t r) {
            Stream stream(seed, r);
            std::vector<double> multiplicity(part.k(), 0.0);
            for (std::size_t slot = 0; slot < part.k(); ++slot) multiplicity[stream.below(part.k())] += 1.0;
            std::vector<double> weights(kp);
            for (std::size_t i = 0; i < kp; ++i) weights[i] = multiplicity[block_of[i]];
            u_star[r] = multiset_pair_sum(h, sorted, weights) / pairs;
        });
    }

    BootstrapDistribution dist;
    dist.meta = {h.name, part.n(), part.p(), part.k(), B, seed, exact ? "exact" : "monte_carlo"};
    if (exact) {
        dist.exact_expectation = boot_ustat_exact_expectation(values, part, h);
        dist.exact_variance = boot_ustat_exact_variance(values, part, h);
    } else {
        dist.exact_expectation = std::accumulate(u_star.begin(), u_star.end(), 0.0) / static_cast<double>(B);
    }
    dist.pivot_values.resize(B);
    for (std::size_t r = 0; r < B; ++r) dist.pivot_values[r] = scale * (u_star[r] - dist.exact_expectation);
    return dist;
}

void write_bootstrap_csv(std::ostream& out, const BootstrapDistribution& dist) {
    const auto& m = dist.meta;
    out << "# statistic=" << m.statistic << '\n'
        << "# n=" << m.n << '\n'
        << "# p=" << m.p << '\n'
        << "# k=" << m.k << '\n'
        << "# B=" << m.B << '\n'
        << "# seed=" << m.seed << '\n'
        << "# centering=" << m.centering << '\n'
        << fmt::format("# exact_expectation={:.17g}\n", dist.exact_expectation);
    if (dist.exact_variance) {
        out << fmt::format("# exact_variance={:.17g}\n", *dist.exact_variance);
    } else {
        out << "# exact_variance=NA\n";
    }
    out << "replicate,pivot\n";
    for (std::size_t r = 0; r < dist.pivot_values.size(); ++r) out << fmt::format("{},{:.17g}\n", r, dist.pivot_values[r]);
}

}  // namespace blockboot
