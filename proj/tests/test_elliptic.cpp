#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "ccsim/elliptic.hpp"
#include "ccsim/grid.hpp"
#include "support/dense_solver.hpp"

using namespace ccsim;

namespace {

HelmholtzProblem random_problem(const std::vector<int>& dims, const std::vector<double>& ext,
                                double sigma, std::mt19937_64& rng, bool nonneg_rhs = false) {
    HelmholtzProblem p;
    p.grid = build_grid(dims, ext);
    p.sigma = sigma;
    p.c = Field(p.grid, 0.0);
    p.rhs = Field(p.grid, 0.0);
    std::uniform_real_distribution<double> cdist(0.0, 5.0);
    std::uniform_real_distribution<double> fdist(nonneg_rhs ? 0.0 : -10.0, 10.0);
    for (double& v : p.c.values) v = cdist(rng);
    for (double& v : p.rhs.values) v = fdist(rng);
    return p;
}

} // namespace

TEST_CASE("constants lie in the kernel of the discrete Laplacian") {
    const Grid g = build_grid({6, 6}, {1.0, 1.0});
    HelmholtzProblem p;
    p.grid = g;
    p.sigma = 4.0;
    p.c = Field(g, 0.0);
    p.rhs = Field(g, 4.0 * 2.5);  // sigma * a with a = 2.5
    const auto [w, rep] = solve(p);
    CHECK(rep.converged);
    for (double v : w.values) CHECK(v == Catch::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("two-cell system reproduces the direct 2x2 inverse") {
    const Grid g = build_grid({2}, {2.0});  // h = 1
    HelmholtzProblem p;
    p.grid = g;
    p.sigma = 1.0;
    p.c = Field(g, 0.0);
    p.rhs = Field(g, 0.0);
    p.rhs[0] = 2.0;
    // Matrix [[2,-1],[-1,2]], rhs (2,0) -> (4/3, 2/3)
    const auto [w, rep] = solve(p, 1e-13);
    CHECK(rep.converged);
    CHECK(w[0] == Catch::Approx(4.0 / 3.0).margin(1e-10));
    CHECK(w[1] == Catch::Approx(2.0 / 3.0).margin(1e-10));
}

TEST_CASE("zero right-hand side returns the zero field without iterating") {
    const Grid g = build_grid({5, 3}, {1.0, 1.0});
    HelmholtzProblem p;
    p.grid = g;
    p.sigma = 2.0;
    p.c = Field(g, 1.0);
    p.rhs = Field(g, 0.0);
    const auto [w, rep] = solve(p);
    CHECK(rep.converged);
    CHECK(rep.iterations == 0);
    for (double v : w.values) CHECK(v == 0.0);
}

TEST_CASE("an exact initial guess is accepted immediately") {
    const Grid g = build_grid({4}, {1.0});
    HelmholtzProblem p;
    p.grid = g;
    p.sigma = 3.0;
    p.c = Field(g, 0.0);
    p.rhs = Field(g, 3.0 * 1.25);
    const Field guess(g, 1.25);
    const auto [w, rep] = solve(p, 1e-11, 0, &guess);
    CHECK(rep.converged);
    CHECK(rep.iterations == 0);
    for (double v : w.values) CHECK(v == 1.25);
}

TEST_CASE("matrix-free CG agrees with the dense oracle on small grids") {
    std::mt19937_64 rng(2024);
    struct Case {
        std::vector<int> dims;
        std::vector<double> ext;
        double sigma;
    };
    const std::vector<Case> cases = {
        {{5}, {1.0}, 10.0},       {{64}, {2.0}, 0.5},          {{8, 8}, {1.0, 1.0}, 10.0},
        {{3, 5}, {1.0, 0.7}, 2.0}, {{4, 4, 4}, {1, 1, 1}, 5.0}, {{2, 3, 4}, {0.5, 1, 2}, 1.0}};
    for (const auto& tc : cases) {
        const HelmholtzProblem p = random_problem(tc.dims, tc.ext, tc.sigma, rng);
        const auto [w, rep] = solve(p, 1e-13);
        CHECK(rep.converged);

        std::vector<double> spacing(tc.dims.size());
        for (std::size_t d = 0; d < tc.dims.size(); ++d) spacing[d] = tc.ext[d] / tc.dims[d];
        const auto a = oracle::assemble_helmholtz(tc.dims, spacing, tc.sigma, p.c.values);
        const auto x = oracle::solve_dense(a, p.rhs.values);
        double worst = 0.0;
        for (int i = 0; i < p.grid.cell_count(); ++i)
            worst = std::max(worst, std::abs(w[i] - x[static_cast<std::size_t>(i)]));
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("assembled operator is an M-matrix") {
    std::mt19937_64 rng(5);
    const HelmholtzProblem p = random_problem({4, 3}, {1.0, 2.0}, 0.25, rng);
    const auto a = assemble_dense(p);
    const int n = p.grid.cell_count();
    for (int i = 0; i < n; ++i) {
        double offdiag = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            CHECK(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] <= 0.0);
            offdiag += std::abs(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
        // strict dominance by sigma + c_i
        CHECK(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] - offdiag >=
              p.sigma - 1e-12);
    }
}

TEST_CASE("nonnegative data yields nonnegative solutions up to solver slack") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 5; ++rep) {
        const HelmholtzProblem p = random_problem({6, 6}, {1.0, 1.0}, 1.5, rng, true);
        const auto [w, r] = solve(p, 1e-12);
        const double slack = 10.0 * 1e-12 * std::sqrt(l2_sq(p.rhs) / p.grid.cell_volume()) / p.sigma;
        CHECK(min_value(w) >= -slack);
        const auto bounds = max_principle_check(p, w, 1e-12);
        CHECK(bounds.passed);
        CHECK(bounds.lower >= 0.0);
    }
}

TEST_CASE("comparison with the constant supersolution bounds w by max f / sigma") {
    std::mt19937_64 rng(7);
    HelmholtzProblem p = random_problem({8}, {1.0}, 2.0, rng);
    for (double& v : p.rhs.values) v = 2.0;  // f = sigma -> w <= 1
    const auto [w, rep] = solve(p, 1e-12);
    CHECK(max_value(w) <= 1.0 + 1e-10);
    const auto bounds = max_principle_check(p, w, 1e-12);
    CHECK(bounds.upper == Catch::Approx(1.0));
    CHECK(bounds.passed);
}

TEST_CASE("max_principle_check flags fabricated violations") {
    const Grid g = build_grid({4}, {1.0});
    HelmholtzProblem p;
    p.grid = g;
    p.sigma = 1.0;
    p.c = Field(g, 0.0);
    p.rhs = Field(g, 1.0);
    Field w = solve(p).first;
    w[2] = -1.0;  // clearly below the enclosure
    const auto bounds = max_principle_check(p, w);
    CHECK_FALSE(bounds.passed);
    CHECK(bounds.violations == 1);
    CHECK(bounds.worst_violation > 0.5);
}

TEST_CASE("solver failure carries the iteration report") {
    std::mt19937_64 rng(31);
    const HelmholtzProblem p = random_problem({16, 16}, {1.0, 1.0}, 1e-6, rng);
    try {
        solve(p, 1e-15, 2);
        FAIL("expected solver_failure_error");
    } catch (const solver_failure_error& e) {
        CHECK(e.iterations == 2);
        CHECK(e.residual > 0.0);
    }
}

TEST_CASE("problem validation rejects broken inputs") {
    const Grid g = build_grid({3}, {1.0});
    HelmholtzProblem p;
    p.grid = g;
    p.sigma = 0.0;
    p.c = Field(g, 0.0);
    p.rhs = Field(g, 1.0);
    CHECK_THROWS_AS(solve(p), contract_violation_error);
    p.sigma = 1.0;
    p.c[1] = -0.1;
    CHECK_THROWS_AS(solve(p), contract_violation_error);
    p.c[1] = 0.0;
    p.rhs = Field(build_grid({4}, {1.0}), 1.0);
    CHECK_THROWS_AS(solve(p), dimension_error);
}
