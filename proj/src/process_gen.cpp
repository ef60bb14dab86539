#include "blockboot/process_gen.hpp"

#include "blockboot/errors.hpp"
#include "blockboot/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <utility>

namespace blockboot {

std::string to_string(Family family) {
    switch (family) {
        case Family::iid_gaussian: return "iid_gaussian";
        case Family::ar1: return "ar1";
        case Family::doubling_map: return "doubling_map";
        case Family::garch11: return "garch11";
        case Family::volterra2: return "volterra2";
    }
    return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
    for (auto f : {Family::iid_gaussian, Family::ar1, Family::doubling_map, Family::garch11, Family::volterra2}) {
        if (to_string(f) == name) return f;
    }
    return std::nullopt;
}

std::string to_string(DecayClass decay) {
    switch (decay) {
        case DecayClass::geometric: return "geometric";
        case DecayClass::polynomial: return "polynomial";
        case DecayClass::none: return "none";
    }
    return "unknown";
}

GeneratorSpec GeneratorSpec::iid_gaussian() { return {}; }

GeneratorSpec GeneratorSpec::ar1(double phi, std::size_t burn_in) {
    GeneratorSpec s;
    s.family = Family::ar1;
    s.phi = phi;
    s.burn_in = burn_in;
    return s;
}

GeneratorSpec GeneratorSpec::doubling_map(std::size_t tail_bits) {
    GeneratorSpec s;
    s.family = Family::doubling_map;
    s.tail_bits = tail_bits;
    return s;
}

GeneratorSpec GeneratorSpec::garch11(double alpha0, double alpha1, double alpha2, std::size_t burn_in) {
    GeneratorSpec s;
    s.family = Family::garch11;
    s.alpha0 = alpha0;
    s.alpha1 = alpha1;
    s.alpha2 = alpha2;
    s.burn_in = burn_in;
    return s;
}

GeneratorSpec GeneratorSpec::volterra2(std::vector<VolterraTerm> terms) {
    GeneratorSpec s;
    s.family = Family::volterra2;
    s.volterra = std::move(terms);
    return s;
}

DecayClass GeneratorSpec::decay_class() const noexcept {
    switch (family) {
        case Family::iid_gaussian: return DecayClass::none;
        // AR(1) is geometrically strong mixing; the doubling map and GARCH(1,1)
        // are NED with geometric constants; a finite Volterra series is m-dependent.
        case Family::ar1:
        case Family::doubling_map:
        case Family::garch11:
        case Family::volterra2: return DecayClass::geometric;
    }
    return DecayClass::none;
}

namespace {

void check_ar1(double phi) {
    if (!std::isfinite(phi) || std::abs(phi) >= 1.0) {
        throw NonstationaryParameterError(fmt::format("ar1 requires |phi| < 1 (got phi = {})", phi));
    }
}

void check_garch(double a0, double a1, double a2) {
    if (!(a0 > 0.0) || !(a1 >= 0.0) || !(a2 >= 0.0) || !std::isfinite(a0)) {
        throw NonstationaryParameterError(
            fmt::format("garch11 requires alpha0 > 0, alpha1 >= 0, alpha2 >= 0 (got {}, {}, {})", a0, a1, a2));
    }
    if (!(a1 + a2 < 1.0)) {
        throw NonstationaryParameterError(
            fmt::format("garch11 requires alpha1 + alpha2 < 1 (got {} + {} = {})", a1, a2, a1 + a2));
    }
}

void check_volterra(const std::vector<VolterraTerm>& coeffs) {
    for (const auto& t : coeffs) {
        if (t.lag1 == t.lag2) {
            throw InvalidCoefficientError(
                fmt::format("volterra2 coefficient g({}, {}) lies on the diagonal; diagonal terms must be zero",
                            t.lag1, t.lag2));
        }
        if (!std::isfinite(t.coeff)) {
            throw InvalidCoefficientError(fmt::format("volterra2 coefficient g({}, {}) is not finite", t.lag1, t.lag2));
        }
    }
}

void check_tail_bits(std::size_t tail_bits) {
    if (tail_bits < 1 || tail_bits > 64) {
        throw InvalidLengthError(fmt::format("doubling_map tail_bits must be in [1, 64] (got {})", tail_bits));
    }
}

void check_length(std::size_t n) {
    if (n == 0) throw InvalidLengthError("series length must be at least 1");
}

// Volterra coefficients folded onto unordered lag pairs {u < v}.
std::map<std::pair<std::size_t, std::size_t>, double> fold_volterra(const std::vector<VolterraTerm>& coeffs) {
    std::map<std::pair<std::size_t, std::size_t>, double> folded;
    for (const auto& t : coeffs) {
        folded[{std::min(t.lag1, t.lag2), std::max(t.lag1, t.lag2)}] += t.coeff;
    }
    return folded;
}

}  // namespace

void GeneratorSpec::validate() const {
    switch (family) {
        case Family::iid_gaussian: break;
        case Family::ar1: check_ar1(phi); break;
        case Family::doubling_map: check_tail_bits(tail_bits); break;
        case Family::garch11: check_garch(alpha0, alpha1, alpha2); break;
        case Family::volterra2: check_volterra(volterra); break;
    }
}

std::string GeneratorSpec::describe() const {
    switch (family) {
        case Family::iid_gaussian: return "iid_gaussian";
        case Family::ar1: return fmt::format("ar1;phi={};burn_in={}", phi, burn_in);
        case Family::doubling_map: return fmt::format("doubling_map;tail_bits={}", tail_bits);
        case Family::garch11:
            return fmt::format("garch11;alpha0={};alpha1={};alpha2={};burn_in={}", alpha0, alpha1, alpha2, burn_in);
        case Family::volterra2: {
            std::string out = "volterra2;coeffs=";
            for (std::size_t i = 0; i < volterra.size(); ++i) {
                if (i) out += ' ';
                out += fmt::format("{}:{}:{}", volterra[i].lag1, volterra[i].lag2, volterra[i].coeff);
            }
            return out;
        }
    }
    return "unknown";
}

TimeSeries::TimeSeries(std::vector<double> values, std::optional<GeneratorSpec> spec, std::uint64_t seed)
    : values_(std::move(values)), spec_(std::move(spec)), seed_(seed) {
    check_length(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw std::invalid_argument(fmt::format("series value at index {} is not finite", i));
        }
    }
}

std::vector<double> innovations(std::uint64_t seed, std::size_t count) {
    Stream stream(seed, 0);
    std::vector<double> z(count);
    for (auto& v : z) v = stream.normal();
    return z;
}

std::vector<std::uint8_t> fair_bits(std::uint64_t seed, std::size_t count) {
    Stream stream(seed, 0);
    std::vector<std::uint8_t> bits(count);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 64 == 0) word = stream.next_u64();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
    }
    return bits;
}

std::vector<double> ar1_from_innovations(double phi, std::span<const double> eps, std::size_t burn_in) {
    check_ar1(phi);
    if (eps.size() <= burn_in) throw InvalidLengthError("ar1 needs more innovations than burn_in");
    std::vector<double> out;
    out.reserve(eps.size() - burn_in);
    double x = 0.0;
    for (std::size_t t = 0; t < eps.size(); ++t) {
        x = phi * x + eps[t];
        if (t >= burn_in) out.push_back(x);
    }
    return out;
}

std::vector<double> garch11_from_innovations(double alpha0, double alpha1, double alpha2, std::span<const double> z,
                                             std::size_t burn_in) {
    check_garch(alpha0, alpha1, alpha2);
    if (z.size() <= burn_in) throw InvalidLengthError("garch11 needs more innovations than burn_in");
    std::vector<double> out;
    out.reserve(z.size() - burn_in);
    // Start at the unconditional variance.
    double sigma2 = alpha0 / (1.0 - alpha1 - alpha2);
    double x = 0.0;
    for (std::size_t t = 0; t < z.size(); ++t) {
        if (t > 0) sigma2 = alpha0 + alpha1 * x * x + alpha2 * sigma2;
        x = std::sqrt(sigma2) * z[t];
        if (t >= burn_in) out.push_back(x);
    }
    return out;
}

std::size_t volterra_max_lag(const std::vector<VolterraTerm>& coeffs) noexcept {
    std::size_t lag = 0;
    for (const auto& t : coeffs) lag = std::max({lag, t.lag1, t.lag2});
    return lag;
}

std::vector<double> volterra2_from_innovations(const std::vector<VolterraTerm>& coeffs, std::span<const double> z) {
    check_volterra(coeffs);
    const std::size_t max_lag = volterra_max_lag(coeffs);
    if (z.size() <= max_lag) throw InvalidLengthError("volterra2 needs more innovations than its maximal lag");
    std::vector<double> out(z.size() - max_lag, 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t now = i + max_lag;
        double x = 0.0;
        for (const auto& t : coeffs) x += t.coeff * z[now - t.lag1] * z[now - t.lag2];
        out[i] = x;
    }
    return out;
}

std::vector<double> doubling_map_from_bits(std::span<const std::uint8_t> bits, std::size_t tail_bits) {
    check_tail_bits(tail_bits);
    if (bits.size() <= tail_bits) throw InvalidLengthError("doubling_map needs more bits than tail_bits");
    const std::size_t n = bits.size() - tail_bits;
    const std::uint64_t mask = tail_bits == 64 ? ~0ull : ((1ull << tail_bits) - 1);
    const double scale = std::ldexp(1.0, -static_cast<int>(tail_bits));

    // window holds Z_i .. Z_{i+T-1} with Z_i as the most significant bit, so
    // X_i = window * 2^-T and the next window is a shift plus one new bit.
    std::uint64_t window = 0;
    for (std::size_t j = 0; j < tail_bits; ++j) window = (window << 1) | (bits[j] & 1u);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<double>(window) * scale;
        window = ((window << 1) & mask) | (bits[i + tail_bits] & 1u);
    }
    return out;
}

TimeSeries gen_iid_gaussian(std::size_t n, std::uint64_t seed) {
    check_length(n);
    return TimeSeries(innovations(seed, n), GeneratorSpec::iid_gaussian(), seed);
}

TimeSeries gen_ar1(double phi, std::size_t n, std::uint64_t seed, std::size_t burn_in) {
    check_ar1(phi);
    check_length(n);
    return TimeSeries(ar1_from_innovations(phi, innovations(seed, n + burn_in), burn_in),
                      GeneratorSpec::ar1(phi, burn_in), seed);
}

TimeSeries gen_doubling_map(std::size_t n, std::uint64_t seed, std::size_t tail_bits) {
    check_tail_bits(tail_bits);
    check_length(n);
    return TimeSeries(doubling_map_from_bits(fair_bits(seed, n + tail_bits), tail_bits),
                      GeneratorSpec::doubling_map(tail_bits), seed);
}

TimeSeries gen_garch11(double alpha0, double alpha1, double alpha2, std::size_t n, std::uint64_t seed,
                       std::size_t burn_in) {
    check_garch(alpha0, alpha1, alpha2);
    check_length(n);
    return TimeSeries(garch11_from_innovations(alpha0, alpha1, alpha2, innovations(seed, n + burn_in), burn_in),
                      GeneratorSpec::garch11(alpha0, alpha1, alpha2, burn_in), seed);
}

TimeSeries gen_volterra2(const std::vector<VolterraTerm>& coeffs, std::size_t n, std::uint64_t seed) {
    check_volterra(coeffs);
    check_length(n);
    const std::size_t max_lag = volterra_max_lag(coeffs);
    return TimeSeries(volterra2_from_innovations(coeffs, innovations(seed, n + max_lag)),
                      GeneratorSpec::volterra2(coeffs), seed);
}

TimeSeries generate(const GeneratorSpec& spec, std::size_t n, std::uint64_t seed) {
    switch (spec.family) {
        case Family::iid_gaussian: return gen_iid_gaussian(n, seed);
        case Family::ar1: return gen_ar1(spec.phi, n, seed, spec.burn_in);
        case Family::doubling_map: return gen_doubling_map(n, seed, spec.tail_bits);
        case Family::garch11: return gen_garch11(spec.alpha0, spec.alpha1, spec.alpha2, n, seed, spec.burn_in);
        case Family::volterra2: return gen_volterra2(spec.volterra, n, seed);
    }
    throw std::invalid_argument("unknown generator family");
}

double stationary_mean(const GeneratorSpec& spec) {
    spec.validate();
    if (spec.family == Family::doubling_map) {
        // Mean of the truncated binary expansion: (1 - 2^-T) / 2.
        return 0.5 * (1.0 - std::ldexp(1.0, -static_cast<int>(spec.tail_bits)));
    }
    return 0.0;
}

double stationary_variance(const GeneratorSpec& spec) {
    spec.validate();
    switch (spec.family) {
        case Family::iid_gaussian: return 1.0;
        case Family::ar1: return 1.0 / (1.0 - spec.phi * spec.phi);
        case Family::doubling_map: {
            // Sum_{j=1..T} 4^-j / 4 = (1 - 4^-T) / 12.
            return (1.0 - std::ldexp(1.0, -2 * static_cast<int>(spec.tail_bits))) / 12.0;
        }
        case Family::garch11: return spec.alpha0 / (1.0 - spec.alpha1 - spec.alpha2);
        case Family::volterra2: {
            double v = 0.0;
            for (const auto& [lags, g] : fold_volterra(spec.volterra)) v += g * g;
            return v;
        }
    }
    return 0.0;
}

double long_run_variance(const GeneratorSpec& spec) {
    spec.validate();
    switch (spec.family) {
        case Family::iid_gaussian: return 1.0;
        case Family::ar1: return 1.0 / ((1.0 - spec.phi) * (1.0 - spec.phi));
        case Family::doubling_map: {
            // Cov(X_1, X_{1+k}) = 2^-k Var X_1 for k < T and 0 beyond.
            const double var = stationary_variance(spec);
            double total = var;
            for (std::size_t k = 1; k < spec.tail_bits; ++k) {
                double cov = 0.0;
                // Shared bits Z_{1+k} .. Z_T carry weights 2^-(j+1) and 2^-(j-k+1).
                for (std::size_t j = k; j < spec.tail_bits; ++j) {
                    cov += std::ldexp(1.0, -static_cast<int>(j + 1)) * std::ldexp(1.0, -static_cast<int>(j - k + 1));
                }
                total += 2.0 * cov / 4.0;
            }
            return total;
        }
        case Family::garch11: return spec.alpha0 / (1.0 - spec.alpha1 - spec.alpha2);
        case Family::volterra2: {
            // Cov(X_0, X_k) = sum_{u<v} G(u,v) G(u+k,v+k); summing over all k
            // groups terms by the lag gap v - u.
            std::map<std::size_t, double> by_gap;
            for (const auto& [lags, g] : fold_volterra(spec.volterra)) by_gap[lags.second - lags.first] += g;
            double total = 0.0;
            for (const auto& [gap, s] : by_gap) total += s * s;
            return total;
        }
    }
    return 0.0;
}

void write_series_csv(std::ostream& out, const TimeSeries& series) {
    const std::string generator = series.spec() ? series.spec()->describe() : std::string("external");
    out << "generator=" << generator << ";seed=" << series.seed() << '\n';
    for (double v : series.values()) out << fmt::format("{:.17g}\n", v);
}

}  // namespace blockboot
