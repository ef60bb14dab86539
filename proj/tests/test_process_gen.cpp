#include "blockboot/errors.hpp"
#include "blockboot/process_gen.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <vector>

using namespace blockboot;

namespace {

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

double variance(std::span<const double> v) {
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / double(v.size() - 1);
}

double lag1_autocorrelation(std::span<const double> v) {
    const double m = mean(v);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        den += (v[i] - m) * (v[i] - m);
        if (i + 1 < v.size()) num += (v[i] - m) * (v[i + 1] - m);
    }
    return num / den;
}

constexpr std::size_t kBig = 1'000'000;

}  // namespace

TEST_CASE("iid gaussian") {
    const auto a = gen_iid_gaussian(3, 11);
    const auto b = gen_iid_gaussian(3, 11);
    CHECK(std::vector<double>(a.values().begin(), a.values().end()) ==
          std::vector<double>(b.values().begin(), b.values().end()));
    CHECK_THROWS_AS((void)gen_iid_gaussian(0, 1), InvalidLengthError);

    const auto big = gen_iid_gaussian(kBig, 2024);
    CHECK(std::abs(mean(big.values())) < 4.0 / std::sqrt(double(kBig)));
    // sd of the sample variance is sqrt(2/n) ~ 0.0014, so 0.01 is ~7 sd.
    CHECK(std::abs(variance(big.values()) - 1.0) < 0.01);
}

TEST_CASE("ar1") {
    SUBCASE("phi = 0 reproduces the iid stream") {
        const auto ar = gen_ar1(0.0, 50, 9, 0);
        const auto iid = gen_iid_gaussian(50, 9);
        for (std::size_t i = 0; i < 50; ++i) CHECK(ar[i] == iid[i]);
    }
    SUBCASE("stationary moments at phi = 0.5") {
        const auto s = gen_ar1(0.5, kBig, 77);
        CHECK(std::abs(lag1_autocorrelation(s.values()) - 0.5) < 0.01);
        CHECK(std::abs(variance(s.values()) - 4.0 / 3.0) < 0.02);
        // Long-run sd of the mean is sqrt(4 / n).
        CHECK(std::abs(mean(s.values())) < 5.0 * std::sqrt(4.0 / double(kBig)));
    }
    SUBCASE("nonstationary parameter") {
        CHECK_THROWS_AS((void)gen_ar1(1.0, 10, 1), NonstationaryParameterError);
        CHECK_THROWS_AS((void)gen_ar1(-1.2, 10, 1), NonstationaryParameterError);
    }
    SUBCASE("burn-in shifts the path without changing it") {
        const std::size_t n = 200, b = 10, m = 25;
        const auto short_burn = gen_ar1(0.7, n, 5, b);
        const auto long_burn = gen_ar1(0.7, n, 5, b + m);
        for (std::size_t i = 0; i + m < n; ++i) CHECK(short_burn[i + m] == long_burn[i]);
    }
}

TEST_CASE("doubling map") {
    SUBCASE("all-zero bits give the zero path") {
        const std::vector<std::uint8_t> zeros(100, 0);
        for (double x : doubling_map_from_bits(zeros, 16)) CHECK(x == 0.0);
    }
    SUBCASE("dynamical identity is exact up to the truncation") {
        for (std::size_t tail : {1u, 8u, 32u, 52u}) {
            const auto s = gen_doubling_map(5000, 3, tail);
            const double bound = std::ldexp(1.0, -static_cast<int>(tail) + 1);
            double worst = 0;
            for (std::size_t i = 0; i + 1 < s.size(); ++i) {
                const double twice = 2.0 * s[i];
                worst = std::max(worst, std::abs(twice - std::floor(twice) - s[i + 1]));
            }
            CHECK(worst <= bound);
        }
    }
    SUBCASE("64 tail bits meet the bound up to double rounding") {
        const auto s = gen_doubling_map(5000, 3);
        const double bound = std::ldexp(1.0, -63) + std::ldexp(1.0, -52);
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            const double twice = 2.0 * s[i];
            CHECK(std::abs(twice - std::floor(twice) - s[i + 1]) <= bound);
        }
    }
    SUBCASE("uniform stationary law") {
        const auto s = gen_doubling_map(kBig, 8);
        CHECK(std::abs(mean(s.values()) - 0.5) < 0.01);
        CHECK(std::abs(variance(s.values()) - 1.0 / 12.0) < 0.01);
        for (double x : s.values()) REQUIRE((x >= 0.0 && x < 1.0));
    }
    SUBCASE("tail bits out of range") {
        CHECK_THROWS_AS((void)gen_doubling_map(10, 1, 0), InvalidLengthError);
        CHECK_THROWS_AS((void)gen_doubling_map(10, 1, 65), InvalidLengthError);
    }
}

TEST_CASE("garch11") {
    SUBCASE("alpha1 = alpha2 = 0 collapses to scaled iid normals") {
        const auto g = gen_garch11(2.0, 0.0, 0.0, 100, 4, 0);
        const auto z = innovations(4, 100);
        for (std::size_t i = 0; i < 100; ++i) CHECK(g[i] == doctest::Approx(std::sqrt(2.0) * z[i]).epsilon(1e-15));
    }
    SUBCASE("unconditional variance") {
        const auto g = gen_garch11(0.1, 0.1, 0.8, kBig, 31);
        CHECK(std::abs(variance(g.values()) - 1.0) < 0.05);
        CHECK(std::abs(mean(g.values())) < 4.0 * std::sqrt(1.0 / double(kBig)));
    }
    SUBCASE("parameter checks") {
        CHECK_THROWS_AS((void)gen_garch11(0.1, 0.5, 0.5, 10, 1), NonstationaryParameterError);
        CHECK_THROWS_AS((void)gen_garch11(0.0, 0.1, 0.1, 10, 1), NonstationaryParameterError);
        CHECK_THROWS_AS((void)gen_garch11(0.1, -0.1, 0.1, 10, 1), NonstationaryParameterError);
    }
}

TEST_CASE("volterra2") {
    SUBCASE("empty coefficient table gives zeros") {
        const auto v = gen_volterra2({}, 20, 1);
        for (double x : v.values()) CHECK(x == 0.0);
    }
    SUBCASE("g(0,1) = 1 has zero mean and unit variance") {
        const auto v = gen_volterra2({{0, 1, 1.0}}, kBig, 12);
        CHECK(std::abs(mean(v.values())) < 5.0 / std::sqrt(double(kBig)));
        CHECK(std::abs(variance(v.values()) - 1.0) < 0.02);
    }
    SUBCASE("finite support: innovations beyond the max lag do not matter") {
        const std::vector<VolterraTerm> coeffs{{0, 1, 0.7}, {1, 2, -0.4}};
        auto z = innovations(6, 30);
        const auto base = volterra2_from_innovations(coeffs, z);
        // Output index i reads z[i .. i + 2]; perturb z[t - 5] for output at z-time t.
        const std::size_t t = 20, out_index = t - 2;
        z[t - 5] += 3.0;
        const auto changed = volterra2_from_innovations(coeffs, z);
        CHECK(changed[out_index] == base[out_index]);
    }
    SUBCASE("diagonal coefficient is rejected") {
        CHECK_THROWS_AS((void)gen_volterra2({{2, 2, 1.0}}, 10, 1), InvalidCoefficientError);
    }
}

TEST_CASE("determinism across every family") {
    const std::vector<GeneratorSpec> specs{GeneratorSpec::iid_gaussian(), GeneratorSpec::ar1(0.3),
                                           GeneratorSpec::doubling_map(), GeneratorSpec::garch11(0.1, 0.1, 0.8),
                                           GeneratorSpec::volterra2({{0, 2, 1.0}})};
    for (const auto& spec : specs) {
        const auto a = generate(spec, 500, 1234);
        const auto b = generate(spec, 500, 1234);
        const auto c = generate(spec, 500, 1235);
        bool same = true, differs = false;
        for (std::size_t i = 0; i < 500; ++i) {
            same = same && (std::memcmp(&a.values()[i], &b.values()[i], sizeof(double)) == 0);
            differs = differs || a[i] != c[i];
        }
        CHECK(same);
        CHECK(differs);
    }
}

TEST_CASE("empirical means sit within 5 standard errors of the stationary mean") {
    const std::vector<GeneratorSpec> specs{GeneratorSpec::ar1(0.5), GeneratorSpec::garch11(0.1, 0.1, 0.8),
                                           GeneratorSpec::volterra2({{0, 1, 1.0}, {1, 3, 0.5}})};
    for (const auto& spec : specs) {
        const auto s = generate(spec, kBig, 404);
        const double se = std::sqrt(long_run_variance(spec) / double(kBig));
        CHECK(std::abs(mean(s.values()) - stationary_mean(spec)) < 5.0 * se);
    }
}

TEST_CASE("analytic moments") {
    CHECK(long_run_variance(GeneratorSpec::ar1(0.5)) == doctest::Approx(4.0));
    CHECK(long_run_variance(GeneratorSpec::doubling_map()) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(stationary_variance(GeneratorSpec::doubling_map()) == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    CHECK(stationary_variance(GeneratorSpec::garch11(0.1, 0.1, 0.8)) == doctest::Approx(1.0));
    // X_t = Z_t Z_{t-1} + Z_{t-1} Z_t folds to 2 Z_t Z_{t-1}.
    CHECK(stationary_variance(GeneratorSpec::volterra2({{0, 1, 1.0}, {1, 0, 1.0}})) == doctest::Approx(4.0));
    // Lags {0,1} and {1,2} share gap 1: sigma^2 = (1 + 0.5)^2.
    CHECK(long_run_variance(GeneratorSpec::volterra2({{0, 1, 1.0}, {1, 2, 0.5}})) == doctest::Approx(2.25));
}

TEST_CASE("decay-class metadata") {
    CHECK(GeneratorSpec::iid_gaussian().decay_class() == DecayClass::none);
    CHECK(GeneratorSpec::ar1(0.2).decay_class() == DecayClass::geometric);
    CHECK(GeneratorSpec::doubling_map().decay_class() == DecayClass::geometric);
}

TEST_CASE("series CSV export") {
    const auto s = gen_ar1(0.5, 3, 42, 10);
    std::ostringstream out;
    write_series_csv(out, s);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "generator=ar1;phi=0.5;burn_in=10;seed=42");
    for (std::size_t i = 0; i < 3; ++i) {
        std::string line;
        std::getline(in, line);
        CHECK(std::stod(line) == s[i]);
    }
    CHECK_THROWS_AS(TimeSeries({}), InvalidLengthError);
    CHECK_THROWS_AS(TimeSeries({1.0, NAN}), std::invalid_argument);
}
