#pragma once

#include "blockboot/bootstrap.hpp"
#include "blockboot/kernels.hpp"
#include "blockboot/process_gen.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace blockboot {

/// Values closer than this (relative to max(1, |v|)) are merged into one atom.
inline constexpr double kLawMergeTolerance = 1e-12;

/// Finite law: atoms sorted by value, positive probabilities summing to one.
struct DiscreteLaw {
    struct Atom {
        double value;
        double prob;
    };
    std::vector<Atom> support;

    [[nodiscard]] double mean() const;
    [[nodiscard]] double variance() const;
    [[nodiscard]] double total_probability() const;
    /// P(X <= x).
    [[nodiscard]] double cdf(double x) const;
    /// Throws std::logic_error if an invariant fails.
    void validate() const;
};

/// Sorts atoms by value and merges neighbours within kLawMergeTolerance.
[[nodiscard]] DiscreteLaw make_law(std::vector<DiscreteLaw::Atom> atoms);

inline constexpr std::size_t kMaxConvolutionBlocks = 12;
inline constexpr std::size_t kMaxEnumeration = 1'000'000;

/// Exact law of sqrt(kp)(bootstrap mean - E*) by k-fold convolution of the block-sum law.
/// Throws CapacityError for k > 12.
[[nodiscard]] DiscreteLaw exact_mean_law(std::span<const double> values, const BlockPartition& part);

/// Same law by direct enumeration of all k^k block assignments. Throws CapacityError when k^k > 10^6.
[[nodiscard]] DiscreteLaw exact_mean_law_enumerated(std::span<const double> values, const BlockPartition& part);

struct UStatLaw {
    DiscreteLaw law;           ///< law of sqrt(kp) (U* - E*[U*])
    double expectation = 0.0;  ///< E*[U*]
    double u_variance = 0.0;   ///< Var*(U*)
};

/// Exact bootstrap law of the U-statistic by enumerating all k^k resamples and
/// evaluating each with a direct pairwise loop. Throws CapacityError when k^k > 10^6.
[[nodiscard]] UStatLaw exact_ustat_law(std::span<const double> values, const BlockPartition& part, const Kernel& h);

struct LongRunVarianceEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

/// Sample variance of sqrt(n) * (mean of path) over M independent paths.
/// Path m uses seed derive_seed(seed, m).
[[nodiscard]] LongRunVarianceEstimate long_run_variance_mc(const GeneratorSpec& spec, std::size_t n, std::size_t M,
                                                           std::uint64_t seed, unsigned threads = 1);

/// Debug dump: header "value,prob".
void write_law_csv(std::ostream& out, const DiscreteLaw& law);

}  // namespace blockboot
