#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ccsim/grid.hpp"
#include "ccsim/truncation.hpp"

using namespace ccsim;

TEST_CASE("truncation branch values") {
    CHECK(t_upper(3.0, 5.0) == 3.0);
    CHECK(t_upper(7.0, 5.0) == 5.0);
    CHECK(t_upper(5.0, 5.0) == 5.0);

    CHECK(t_band(-1.0, 5.0) == 0.0);
    CHECK(t_band(2.0, 5.0) == 2.0);
    CHECK(t_band(9.0, 5.0) == 5.0);

    CHECK(t_lower(0.2, 0.5) == 0.5);
    CHECK(t_lower(0.7, 0.5) == 0.7);
    CHECK(t_lower(0.5, 0.5) == 0.5);
}

TEST_CASE("truncations are idempotent, monotone, and band = upper after positive part") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    const double m = 4.0, alpha = 0.3;
    for (int i = 0; i < 1000; ++i) {
        const double a = dist(rng), b = dist(rng);
        CHECK(t_upper(t_upper(a, m), m) == t_upper(a, m));
        CHECK(t_band(t_band(a, m), m) == t_band(a, m));
        CHECK(t_lower(t_lower(a, alpha), alpha) == t_lower(a, alpha));
        if (a <= b) {
            CHECK(t_upper(a, m) <= t_upper(b, m));
            CHECK(t_band(a, m) <= t_band(b, m));
            CHECK(t_lower(a, alpha) <= t_lower(b, alpha));
        }
        CHECK(t_band(a, m) == t_upper(std::max(a, 0.0), m));
        CHECK(t_lower(a, alpha) >= alpha);
    }
}

TEST_CASE("field overloads apply pointwise") {
    const Grid g = build_grid({3}, {1.0});
    Field f(g, 0.0);
    f[0] = -2.0;
    f[1] = 1.0;
    f[2] = 9.0;
    const Field up = t_upper(f, 5.0);
    CHECK(up[0] == -2.0);
    CHECK(up[2] == 5.0);
    const Field band = t_band(f, 5.0);
    CHECK(band[0] == 0.0);
    CHECK(band[1] == 1.0);
    CHECK(band[2] == 5.0);
    const Field low = t_lower(f, 0.5);
    CHECK(low[0] == 0.5);
    CHECK(low[2] == 9.0);
}

TEST_CASE("pow_s values, identities and contract") {
    CHECK(pow_s(4.0, 1.0) == 4.0);
    CHECK(pow_s(2.0, 2.0) == 4.0);
    CHECK(pow_s(0.0, 1.7) == 0.0);
    CHECK(pow_s(1.0, 3.3) == 1.0);
    CHECK(pow_s(3.0, 1.5) == Catch::Approx(5.196152422706632).epsilon(1e-14));
    CHECK(pow_s(3.0, 1.5) == Catch::Approx(std::exp(1.5 * std::log(3.0))).epsilon(1e-15));
    CHECK_THROWS_AS(pow_s(-1.0, 2.0), contract_violation_error);
}

TEST_CASE("power difference bound holds over random nonnegative pairs") {
    // |w2^s - w1^s| <= s (w2 + w1)^(s-1) |w2 - w1|
    std::mt19937_64 rng(123456);
    std::uniform_real_distribution<double> wdist(0.0, 100.0);
    std::uniform_real_distribution<double> sdist(1.0, 4.0);
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const double w1 = wdist(rng), w2 = wdist(rng), s = sdist(rng);
        const double lhs = std::abs(pow_s(w2, s) - pow_s(w1, s));
        const double rhs = s * std::pow(w1 + w2, s - 1.0) * std::abs(w2 - w1);
        if (lhs > rhs + 1e-9) ++violations;
    }
    CHECK(violations == 0);
}
