#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blockboot {

enum class Family { iid_gaussian, ar1, doubling_map, garch11, volterra2 };

/// Documented decay of the mixing / near-epoch-dependence coefficients.
/// Metadata only; nothing here estimates alpha(k), beta(k) or a_l.
enum class DecayClass { geometric, polynomial, none };

[[nodiscard]] std::string to_string(Family family);
[[nodiscard]] std::optional<Family> parse_family(std::string_view name);
[[nodiscard]] std::string to_string(DecayClass decay);

/// One term g(lag1, lag2) * Z_{t-lag1} * Z_{t-lag2} of a second-order Volterra series.
struct VolterraTerm {
    std::size_t lag1 = 0;
    std::size_t lag2 = 0;
    double coeff = 0.0;

    friend bool operator==(const VolterraTerm&, const VolterraTerm&) = default;
};

inline constexpr std::size_t kDefaultBurnIn = 1000;
inline constexpr std::size_t kDefaultTailBits = 64;

/**
 * @brief Family plus parameters of a simulated stationary process.
 *
 * Only the fields relevant to `family` are read:
 *  - ar1: phi, burn_in
 *  - doubling_map: tail_bits
 *  - garch11: alpha0, alpha1, alpha2, burn_in
 *  - volterra2: volterra
 */
struct GeneratorSpec {
    Family family = Family::iid_gaussian;
    double phi = 0.0;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    std::vector<VolterraTerm> volterra;
    std::size_t burn_in = 0;
    std::size_t tail_bits = kDefaultTailBits;

    [[nodiscard]] static GeneratorSpec iid_gaussian();
    [[nodiscard]] static GeneratorSpec ar1(double phi, std::size_t burn_in = kDefaultBurnIn);
    [[nodiscard]] static GeneratorSpec doubling_map(std::size_t tail_bits = kDefaultTailBits);
    [[nodiscard]] static GeneratorSpec garch11(double alpha0, double alpha1, double alpha2,
                                               std::size_t burn_in = kDefaultBurnIn);
    [[nodiscard]] static GeneratorSpec volterra2(std::vector<VolterraTerm> terms);

    [[nodiscard]] DecayClass decay_class() const noexcept;

    /// Throws NonstationaryParameterError / InvalidCoefficientError / InvalidLengthError.
    void validate() const;

    /// Compact single-token description, e.g. "ar1;phi=0.5;burn_in=1000".
    [[nodiscard]] std::string describe() const;

    friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

/// An observed or simulated path. `spec` is empty for external data.
class TimeSeries {
public:
    /// Throws InvalidLengthError on an empty sequence, std::invalid_argument on non-finite values.
    explicit TimeSeries(std::vector<double> values, std::optional<GeneratorSpec> spec = std::nullopt,
                        std::uint64_t seed = 0);

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] const std::optional<GeneratorSpec>& spec() const noexcept { return spec_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

private:
    std::vector<double> values_;
    std::optional<GeneratorSpec> spec_;
    std::uint64_t seed_;
};

// Generators. All innovations come from Stream(seed, 0), consumed in time order,
// so a run with burn-in b+m reproduces a run with burn-in b shifted by m.

[[nodiscard]] TimeSeries gen_iid_gaussian(std::size_t n, std::uint64_t seed);
[[nodiscard]] TimeSeries gen_ar1(double phi, std::size_t n, std::uint64_t seed,
                                 std::size_t burn_in = kDefaultBurnIn);
[[nodiscard]] TimeSeries gen_doubling_map(std::size_t n, std::uint64_t seed,
                                          std::size_t tail_bits = kDefaultTailBits);
[[nodiscard]] TimeSeries gen_garch11(double alpha0, double alpha1, double alpha2, std::size_t n,
                                     std::uint64_t seed, std::size_t burn_in = kDefaultBurnIn);
[[nodiscard]] TimeSeries gen_volterra2(const std::vector<VolterraTerm>& coeffs, std::size_t n, std::uint64_t seed);

/// Dispatches on spec.family.
[[nodiscard]] TimeSeries generate(const GeneratorSpec& spec, std::size_t n, std::uint64_t seed);

// Deterministic cores driven by explicit innovations. The seeded generators are
// thin wrappers around these; tests use them to force or perturb draws.

/// Standard normal innovations exactly as the seeded generators draw them.
[[nodiscard]] std::vector<double> innovations(std::uint64_t seed, std::size_t count);
/// Fair bits exactly as gen_doubling_map draws them.
[[nodiscard]] std::vector<std::uint8_t> fair_bits(std::uint64_t seed, std::size_t count);

[[nodiscard]] std::vector<double> ar1_from_innovations(double phi, std::span<const double> eps, std::size_t burn_in);
[[nodiscard]] std::vector<double> garch11_from_innovations(double alpha0, double alpha1, double alpha2,
                                                           std::span<const double> z, std::size_t burn_in);
/// z holds max_lag pre-sample innovations followed by one per output value.
[[nodiscard]] std::vector<double> volterra2_from_innovations(const std::vector<VolterraTerm>& coeffs,
                                                             std::span<const double> z);
/// Output length is bits.size() - tail_bits. Requires 1 <= tail_bits <= 64.
[[nodiscard]] std::vector<double> doubling_map_from_bits(std::span<const std::uint8_t> bits, std::size_t tail_bits);

[[nodiscard]] std::size_t volterra_max_lag(const std::vector<VolterraTerm>& coeffs) noexcept;

// Analytic stationary moments, where known.

[[nodiscard]] double stationary_mean(const GeneratorSpec& spec);
[[nodiscard]] double stationary_variance(const GeneratorSpec& spec);
/// sigma^2 = Var X_1 + 2 sum_k Cov(X_1, X_{1+k}).
[[nodiscard]] double long_run_variance(const GeneratorSpec& spec);

/// Single-column CSV: header "generator=<describe>;seed=<seed>", then one value per line.
void write_series_csv(std::ostream& out, const TimeSeries& series);

}  // namespace blockboot
