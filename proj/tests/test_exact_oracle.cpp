#include "blockboot/bootstrap.hpp"
#include "blockboot/errors.hpp"
#include "blockboot/exact_oracle.hpp"
#include "blockboot/kernels.hpp"
#include "blockboot/process_gen.hpp"
#include "blockboot/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

using namespace blockboot;

namespace {

bool has_atom(const DiscreteLaw& law, double value, double prob) {
    for (const auto& a : law.support)
        if (std::abs(a.value - value) < 1e-12 && std::abs(a.prob - prob) < 1e-12) return true;
    return false;
}

std::vector<double> random_values(std::uint64_t seed, std::size_t n) {
    Stream s(seed, 0);
    std::vector<double> v(n);
    for (auto& x : v) x = s.normal() * 3.0 + s.uniform();
    return v;
}

}  // namespace

TEST_CASE("mean pivot law of (1,2,3,4) with p = 2") {
    const std::vector<double> xs{1, 2, 3, 4};
    const auto part = partition(4, 2);
    for (const auto& law : {exact_mean_law(xs, part), exact_mean_law_enumerated(xs, part)}) {
        CHECK(law.support.size() == 3);
        CHECK(has_atom(law, -2.0, 0.25));
        CHECK(has_atom(law, 0.0, 0.5));
        CHECK(has_atom(law, 2.0, 0.25));
        CHECK_NOTHROW(law.validate());
        CHECK(law.cdf(-2.5) == 0.0);
        CHECK(law.cdf(0.0) == doctest::Approx(0.75));
        CHECK(law.cdf(2.0) == doctest::Approx(1.0));
    }
}

TEST_CASE("U pivot law of (1,2,3,4) with p = 2 and gini") {
    const std::vector<double> xs{1, 2, 3, 4};
    const auto u = exact_ustat_law(xs, partition(4, 2), gini_kernel());
    CHECK(u.expectation == doctest::Approx(7.0 / 6.0).epsilon(1e-14));
    CHECK(u.law.support.size() == 2);
    CHECK(has_atom(u.law, -1.0, 0.5));
    CHECK(has_atom(u.law, 1.0, 0.5));
    CHECK(u.u_variance == doctest::Approx(0.25));
}

TEST_CASE("constant series give point masses") {
    const std::vector<double> c(12, -1.5);
    const auto part = partition(12, 3);
    const auto m = exact_mean_law(c, part);
    REQUIRE(m.support.size() == 1);
    CHECK(m.support[0].value == doctest::Approx(0.0));
    const auto u = exact_ustat_law(c, part, gini_kernel());
    REQUIRE(u.law.support.size() == 1);
    CHECK(u.law.support[0].value == doctest::Approx(0.0));
    CHECK(u.expectation == 0.0);
}

TEST_CASE("convolution and enumeration agree") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const std::size_t k = 1 + seed % 6;
        const std::size_t p = 1 + seed % 3;
        const auto xs = random_values(seed, k * p + seed % 2);
        const auto part = partition(xs.size(), p);
        const auto a = exact_mean_law(xs, part);
        const auto b = exact_mean_law_enumerated(xs, part);
        REQUIRE(a.support.size() == b.support.size());
        for (std::size_t i = 0; i < a.support.size(); ++i) {
            CHECK(a.support[i].value == doctest::Approx(b.support[i].value).epsilon(1e-10));
            CHECK(a.support[i].prob == doctest::Approx(b.support[i].prob).epsilon(1e-10));
        }
    }
}

TEST_CASE("closed forms match the oracle laws over random series") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const std::size_t k = 1 + seed % 8;
        const std::size_t p = 1 + (seed / 8) % 4;
        const auto xs = random_values(100 + seed, k * p + seed % 3);
        const auto part = partition(xs.size(), p);
        const auto law = exact_mean_law(xs, part);
        CHECK(std::abs(law.total_probability() - 1.0) < 1e-12);
        const auto mm = boot_mean_exact_moments(xs, part);
        CHECK(std::abs(law.mean()) < 1e-10);
        CHECK(std::abs(law.variance() - mm.scaled_variance) < 1e-10 * std::max(1.0, mm.scaled_variance));
    }
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const std::size_t k = 2 + seed % 4;
        const std::size_t p = 1 + seed % 3;
        const auto xs = random_values(200 + seed, k * p);
        const auto part = partition(xs.size(), p);
        for (const auto& h : {gini_kernel(), variance_half_kernel()}) {
            const auto u = exact_ustat_law(xs, part, h);
            CHECK(std::abs(u.expectation - boot_ustat_exact_expectation(xs, part, h)) < 1e-10);
            const double scaled = double(k * p) * u.u_variance;
            CHECK(std::abs(boot_ustat_exact_variance(xs, part, h) - scaled) < 1e-9 * std::max(1.0, scaled));
        }
    }
}

TEST_CASE("capacity limits") {
    const std::vector<double> xs(13 * 2, 1.0);
    CHECK_THROWS_AS((void)exact_mean_law(xs, partition(26, 2)), CapacityError);
    const std::vector<double> ys(8, 1.0);
    CHECK_THROWS_AS((void)exact_mean_law_enumerated(ys, partition(8, 1)), CapacityError);
    CHECK_THROWS_AS((void)exact_ustat_law(ys, partition(8, 1), gini_kernel()), CapacityError);
    const std::vector<double> zs(7, 1.0);
    CHECK_NOTHROW((void)exact_mean_law_enumerated(zs, partition(7, 1)));
}

TEST_CASE("law validation rejects broken laws") {
    DiscreteLaw bad{{{0.0, 0.5}}};
    CHECK_THROWS_AS(bad.validate(), std::logic_error);
    DiscreteLaw unsorted{{{1.0, 0.5}, {0.0, 0.5}}};
    CHECK_THROWS_AS(unsorted.validate(), std::logic_error);
    const auto merged = make_law({{1.0, 0.25}, {1.0 + 1e-14, 0.25}, {-1.0, 0.5}});
    CHECK(merged.support.size() == 2);
    CHECK_NOTHROW(merged.validate());
}

TEST_CASE("long-run variance by Monte Carlo") {
    SUBCASE("iid gaussian") {
        const auto est = long_run_variance_mc(GeneratorSpec::iid_gaussian(), 1024, 2000, 1);
        CHECK(std::abs(est.estimate - 1.0) < 3 * est.standard_error);
    }
    SUBCASE("ar1 phi = 0.5") {
        const auto est = long_run_variance_mc(GeneratorSpec::ar1(0.5), 1 << 14, 2000, 2);
        CHECK(std::abs(est.estimate - 4.0) < 3 * est.standard_error);
    }
    SUBCASE("doubling map") {
        const auto est = long_run_variance_mc(GeneratorSpec::doubling_map(), 4096, 2000, 3);
        CHECK(std::abs(est.estimate - 0.25) < 3 * est.standard_error);
    }
    SUBCASE("thread count does not matter") {
        const auto a = long_run_variance_mc(GeneratorSpec::ar1(0.2), 256, 200, 4, 1);
        const auto b = long_run_variance_mc(GeneratorSpec::ar1(0.2), 256, 200, 4, 3);
        CHECK(a.estimate == b.estimate);
    }
}

TEST_CASE("law CSV dump") {
    std::ostringstream out;
    write_law_csv(out, make_law({{0.0, 0.5}, {1.0, 0.5}}));
    CHECK(out.str().rfind("value,prob\n", 0) == 0);
}
