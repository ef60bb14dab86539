#pragma once

#include "blockboot/kernels.hpp"
#include "blockboot/process_gen.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blockboot {

/**
 * @brief Parameters of the dyadic block-length schedule.
 *
 * p(n) = max(p_min, floor(c * 2^l ^ eps)) where 2^l < n <= 2^(l+1), so p is
 * constant on each dyadic range and p(n) <= c * n^eps + p_min.
 */
struct ScheduleParams {
    double eps = 1.0 / 3.0;
    double c = 1.0;
    std::size_t p_min = 2;

    /// Throws std::invalid_argument unless 0 < eps < 1, c > 0, p_min >= 2.
    void validate() const;

    friend bool operator==(const ScheduleParams&, const ScheduleParams&) = default;
};

[[nodiscard]] std::size_t schedule_block_length(std::size_t n, const ScheduleParams& params = {});

/// Half-open index range [begin, end) into the series (0-based).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/**
 * @brief Nonoverlapping blocks B_1..B_k of length p over a series of length n.
 *
 * k = floor(n / p). Observations kp .. n-1 (0-based) are never used.
 */
class BlockPartition {
public:
    /// Throws InvalidPartitionError unless 1 <= p <= n.
    BlockPartition(std::size_t n, std::size_t p);

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t p() const noexcept { return p_; }
    [[nodiscard]] std::size_t k() const noexcept { return k_; }
    [[nodiscard]] std::size_t used() const noexcept { return k_ * p_; }

    /// Block i in 0..k-1.
    [[nodiscard]] IndexRange block(std::size_t i) const noexcept { return {i * p_, (i + 1) * p_}; }
    [[nodiscard]] std::vector<IndexRange> blocks() const;

    /// Throws InvalidPartitionError when the series length differs from n().
    void check_matches(std::size_t series_length) const;

private:
    std::size_t n_;
    std::size_t p_;
    std::size_t k_;
};

[[nodiscard]] BlockPartition partition(std::size_t n, std::size_t p);

/// Block indices (0-based) of replicate `replicate`, drawn from Stream(seed, replicate).
[[nodiscard]] std::vector<std::size_t> draw_blocks(const BlockPartition& part, std::uint64_t seed,
                                                   std::uint64_t replicate);

/// Concatenation of the blocks named by `draws` (0-based block indices).
[[nodiscard]] std::vector<double> resample_with_draws(std::span<const double> values, const BlockPartition& part,
                                                      std::span<const std::size_t> draws);

/// Bootstrap sample of length kp; identical to replicate 0 of the pivots seeded with draw_seed.
[[nodiscard]] std::vector<double> resample(const TimeSeries& series, const BlockPartition& part,
                                           std::uint64_t draw_seed);

struct MeanMoments {
    double expectation = 0.0;      ///< E* of the bootstrap mean = mean of the first kp observations
    double scaled_variance = 0.0;  ///< Var*(sqrt(kp) * bootstrap mean)
};

/**
 * Exact conditional moments of the bootstrap mean:
 *   E* = (1/kp) sum_{i<kp} X_i,
 *   Var*_scaled = (1/kp) sum_b (S_b - p E*)^2 with S_b the block sums.
 */
[[nodiscard]] MeanMoments boot_mean_exact_moments(std::span<const double> values, const BlockPartition& part);
[[nodiscard]] MeanMoments boot_mean_exact_moments(const TimeSeries& series, const BlockPartition& part);

enum class Centering { automatic, exact, monte_carlo };

struct BootstrapMeta {
    std::string statistic;
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t k = 0;
    std::size_t B = 0;
    std::uint64_t seed = 0;
    /// "exact" or "monte_carlo" (U-statistics on very long custom-kernel samples).
    std::string centering = "exact";
};

struct BootstrapDistribution {
    std::vector<double> pivot_values;
    double exact_expectation = 0.0;
    std::optional<double> exact_variance;
    BootstrapMeta meta;
};

struct PivotOptions {
    unsigned threads = 1;
    Centering centering = Centering::automatic;
};

/// kp above which automatic centering switches to Monte Carlo for custom kernels.
inline constexpr std::size_t kMonteCarloCenteringThreshold = 20000;

/// B replicates of sqrt(kp) (bootstrap mean - E*). Replicate r uses Stream(seed, r).
[[nodiscard]] BootstrapDistribution boot_mean_pivot(const TimeSeries& series, const BlockPartition& part,
                                                    std::size_t B, std::uint64_t seed, const PivotOptions& options = {});

/**
 * E*[U*] for the U-statistic of the bootstrap sample. Pairs inside one slot
 * average h over a single uniformly drawn block; pairs across two slots average
 * h over two independent blocks, which sums to the full double sum over the
 * first kp observations:
 *   E*[U*] = 2/(kp(kp-1)) [ sum_b sum_{r<s in B_b} h + (k-1)/(2k) sum_{i,j<kp} h(X_i, X_j) ].
 */
[[nodiscard]] double boot_ustat_exact_expectation(std::span<const double> values, const BlockPartition& part,
                                                  const Kernel& h);
[[nodiscard]] double boot_ustat_exact_expectation(const TimeSeries& series, const BlockPartition& part,
                                                  const Kernel& h);

/// Var*(sqrt(kp) U*), exact over the resampling law. O(k^2) block cross sums.
[[nodiscard]] double boot_ustat_exact_variance(std::span<const double> values, const BlockPartition& part,
                                               const Kernel& h);

/// B replicates of sqrt(kp) (U* - E*[U*]). Replicate r uses Stream(seed, r).
[[nodiscard]] BootstrapDistribution boot_ustat_pivot(const TimeSeries& series, const BlockPartition& part,
                                                     const Kernel& h, std::size_t B, std::uint64_t seed,
                                                     const PivotOptions& options = {});

/// `#` metadata lines, a `replicate,pivot` header, then B rows (replicate = stream id).
void write_bootstrap_csv(std::ostream& out, const BootstrapDistribution& dist);

}  // namespace blockboot
