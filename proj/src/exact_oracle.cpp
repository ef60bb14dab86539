#include "blockboot/exact_oracle.hpp"

#include "blockboot/errors.hpp"
#include "blockboot/parallel.hpp"
#include "blockboot/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace blockboot {

double DiscreteLaw::mean() const {
    double m = 0.0;
    for (const auto& a : support) m += a.value * a.prob;
    return m;
}

double DiscreteLaw::variance() const {
    const double m = mean();
    double v = 0.0;
    for (const auto& a : support) v += (a.value - m) * (a.value - m) * a.prob;
    return v;
}

double DiscreteLaw::total_probability() const {
    double t = 0.0;
    for (const auto& a : support) t += a.prob;
    return t;
}

double DiscreteLaw::cdf(double x) const {
    double c = 0.0;
    for (const auto& a : support) {
        if (a.value > x) break;
        c += a.prob;
    }
    return std::min(1.0, c);
}

void DiscreteLaw::validate() const {
    if (support.empty()) throw std::logic_error("discrete law has empty support");
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (!(support[i].prob > 0.0)) throw std::logic_error("discrete law has a nonpositive probability");
        if (i > 0 && !(support[i - 1].value < support[i].value)) {
            throw std::logic_error("discrete law values are not strictly ascending");
        }
    }
    if (std::abs(total_probability() - 1.0) > 1e-12) {
        throw std::logic_error(fmt::format("discrete law probabilities sum to {:.17g}", total_probability()));
    }
}

DiscreteLaw make_law(std::vector<DiscreteLaw::Atom> atoms) {
    std::sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    DiscreteLaw law;
    for (const auto& a : atoms) {
        if (!law.support.empty()) {
            auto& last = law.support.back();
            if (a.value - last.value <= kLawMergeTolerance * std::max(1.0, std::abs(last.value))) {
                last.prob += a.prob;
                continue;
            }
        }
        law.support.push_back(a);
    }
    return law;
}

namespace {

// Equally likely outcomes: merge by counting, then divide once.
DiscreteLaw uniform_law(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, std::size_t>> counts;
    for (double v : values) {
        if (!counts.empty() && v - counts.back().first <= kLawMergeTolerance * std::max(1.0, std::abs(counts.back().first))) {
            ++counts.back().second;
        } else {
            counts.emplace_back(v, 1);
        }
    }
    DiscreteLaw law;
    const double total = static_cast<double>(values.size());
    for (const auto& [v, c] : counts) law.support.push_back({v, static_cast<double>(c) / total});
    return law;
}

std::size_t checked_power(std::size_t k) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) {
        if (total > kMaxEnumeration / k) {
            throw CapacityError(fmt::format("k^k enumeration with k = {} exceeds {} resamples", k, kMaxEnumeration));
        }
        total *= k;
    }
    return total;
}

// Mixed-radix odometer over all k^k block assignments.
template <typename Visit>
void for_each_assignment(std::size_t k, Visit&& visit) {
    const std::size_t count = checked_power(k);
    std::vector<std::size_t> draws(k, 0);
    for (std::size_t c = 0; c < count; ++c) {
        visit(std::span<const std::size_t>(draws));
        for (std::size_t pos = 0; pos < k; ++pos) {
            if (++draws[pos] < k) break;
            draws[pos] = 0;
        }
    }
}

std::vector<double> centered_block_sums(std::span<const double> values, const BlockPartition& part) {
    const double mean = boot_mean_exact_moments(values, part).expectation;
    std::vector<double> sums(part.k(), 0.0);
    for (std::size_t b = 0; b < part.k(); ++b) {
        const auto r = part.block(b);
        for (std::size_t i = r.begin; i < r.end; ++i) sums[b] += values[i];
        sums[b] -= static_cast<double>(part.p()) * mean;
    }
    return sums;
}

}  // namespace

DiscreteLaw exact_mean_law(std::span<const double> values, const BlockPartition& part) {
    part.check_matches(values.size());
    const std::size_t k = part.k();
    if (k > kMaxConvolutionBlocks) {
        throw CapacityError(fmt::format("convolution oracle supports k <= {}, got k = {}", kMaxConvolutionBlocks, k));
    }
    const auto sums = centered_block_sums(values, part);
    const double scale = 1.0 / std::sqrt(static_cast<double>(part.used()));
    const double each = 1.0 / static_cast<double>(k);

    DiscreteLaw block_law;
    {
        std::vector<DiscreteLaw::Atom> atoms;
        for (double s : sums) atoms.push_back({s, each});
        block_law = make_law(std::move(atoms));
        block_law.validate();
    }
    DiscreteLaw total = block_law;
    for (std::size_t step = 1; step < k; ++step) {
        std::vector<DiscreteLaw::Atom> atoms;
        atoms.reserve(total.support.size() * block_law.support.size());
        for (const auto& a : total.support) {
            for (const auto& b : block_law.support) atoms.push_back({a.value + b.value, a.prob * b.prob});
        }
        total = make_law(std::move(atoms));
        total.validate();
    }
    for (auto& a : total.support) a.value *= scale;
    return total;
}

DiscreteLaw exact_mean_law_enumerated(std::span<const double> values, const BlockPartition& part) {
    part.check_matches(values.size());
    const std::size_t k = part.k();
    const auto sums = centered_block_sums(values, part);
    const double scale = 1.0 / std::sqrt(static_cast<double>(part.used()));
    std::vector<double> outcomes;
    outcomes.reserve(checked_power(k));
    for_each_assignment(k, [&](std::span<const std::size_t> draws) {
        double s = 0.0;
        for (std::size_t b : draws) s += sums[b];
        outcomes.push_back(s * scale);
    });
    auto law = uniform_law(std::move(outcomes));
    law.validate();
    return law;
}

UStatLaw exact_ustat_law(std::span<const double> values, const BlockPartition& part, const Kernel& h) {
    part.check_matches(values.size());
    if (part.used() < 2) throw InsufficientSampleError("bootstrapped U-statistic needs kp >= 2");
    const std::size_t k = part.k();
    const double prob = 1.0 / static_cast<double>(checked_power(k));
    const double kp = static_cast<double>(part.used());
    const double pairs = kp * (kp - 1.0) / 2.0;

    std::vector<double> u_values;
    for_each_assignment(k, [&](std::span<const std::size_t> draws) {
        const auto sample = resample_with_draws(values, part, draws);
        double total = 0.0;
        for (std::size_t i = 0; i < sample.size(); ++i) {
            for (std::size_t j = i + 1; j < sample.size(); ++j) total += h.eval(sample[i], sample[j]);
        }
        u_values.push_back(total / pairs);
    });

    UStatLaw out;
    out.expectation = std::accumulate(u_values.begin(), u_values.end(), 0.0) * prob;
    double var = 0.0;
    for (double u : u_values) var += (u - out.expectation) * (u - out.expectation) * prob;
    out.u_variance = var;
    const double scale = std::sqrt(kp);
    for (double& u : u_values) u = scale * (u - out.expectation);
    out.law = uniform_law(std::move(u_values));
    out.law.validate();
    return out;
}

LongRunVarianceEstimate long_run_variance_mc(const GeneratorSpec& spec, std::size_t n, std::size_t M,
                                             std::uint64_t seed, unsigned threads) {
    if (M < 2) throw std::invalid_argument("long_run_variance_mc needs M >= 2 paths");
    spec.validate();
    std::vector<double> scaled(M);
    const double root_n = std::sqrt(static_cast<double>(n));
    parallel_for(M, threads, [&](std::size_t m) {
        const auto path = generate(spec, n, derive_seed(seed, m));
        const auto v = path.values();
        scaled[m] = root_n * std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    });
    const double md = static_cast<double>(M);
    const double centre = std::accumulate(scaled.begin(), scaled.end(), 0.0) / md;
    double m2 = 0.0, m4 = 0.0;
    for (double y : scaled) {
        const double d = (y - centre) * (y - centre);
        m2 += d;
        m4 += d * d;
    }
    LongRunVarianceEstimate est;
    est.estimate = m2 / (md - 1.0);
    const double biased = m2 / md;
    est.standard_error = std::sqrt(std::max(0.0, m4 / md - biased * biased) / md);
    return est;
}

void write_law_csv(std::ostream& out, const DiscreteLaw& law) {
    out << "value,prob\n";
    for (const auto& a : law.support) out << fmt::format("{:.17g},{:.17g}\n", a.value, a.prob);
}

}  // namespace blockboot
