#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ccsim/grid.hpp"
#include "ccsim/scalar_oracle.hpp"
#include "ccsim/step.hpp"

using namespace ccsim;

namespace {

SchemeParams tight_params(double k, double s = 1.0) {
    SchemeParams p;
    p.k = k;
    p.m = 10.0;
    p.alpha = 0.1;
    p.s = s;
    p.picard_tol = 1e-12;
    p.picard_maxit = 200;
    p.linear_tol = 1e-14;
    return p;
}

Field bump_field(const Grid& g, double base, double amp) {
    Field f(g, 0.0);
    for (int i = 0; i < g.dims[0]; ++i)
        for (int j = 0; j < g.dims[1]; ++j) {
            const double x = g.center(0, i) - 0.5;
            const double y = g.ndim > 1 ? g.center(1, j) - 0.5 : 0.0;
            f[g.index(i, j)] = base + amp * std::exp(-(x * x + y * y) / 0.02);
        }
    return f;
}

State initial_state(const Field& u0, const Field& v0, double alpha) {
    State st;
    st.u = u0;
    st.z = v0;
    for (double& z : st.z.values) z = std::sqrt(z + alpha * alpha);
    st.v = v0;
    return st;
}

} // namespace

TEST_CASE("mass is the volume-weighted cell sum") {
    const Grid unit = build_grid({4, 4}, {1.0, 1.0});
    CHECK(mass(Field(unit, 1.0)) == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(mass(Field(unit, 0.0)) == 0.0);

    const Grid line = build_grid({4}, {1.0});  // h = 0.25
    Field f(line, 0.0);
    f[0] = 1.0;
    f[1] = 2.0;
    f[2] = 3.0;
    f[3] = 4.0;
    CHECK(mass(f) == Catch::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("substep with all sources vanishing reproduces the previous level") {
    const Grid g = build_grid({5, 5}, {1.0, 1.0});
    SchemeParams p = tight_params(0.25);
    const double c = 0.8;
    State prev;
    prev.u = Field(g, 0.0);
    prev.z = Field(g, c);
    const auto [u_new, z_new] = picard_substep(prev, Field(g, 0.0), Field(g, c), p);
    for (double v : u_new.values) CHECK(v == 0.0);
    for (double v : z_new.values) CHECK(v == Catch::Approx(c).margin(1e-13));
}

TEST_CASE("z identically alpha is the exact fixed point when v0 = 0") {
    const Grid g = build_grid({6, 4}, {1.0, 1.0});
    SchemeParams p = tight_params(0.1);
    State prev;
    prev.u = bump_field(g, 0.5, 2.0);
    prev.z = Field(g, p.alpha);
    const auto [u_new, z_new] = picard_substep(prev, prev.u, prev.z, p);
    for (double v : z_new.values) CHECK(v == Catch::Approx(p.alpha).margin(1e-13));
}

TEST_CASE("homogeneous substep matches the scalar formula") {
    const Grid g = build_grid({4, 4}, {1.0, 1.0});
    SchemeParams p = tight_params(0.1);
    const double u0 = 2.0, z0 = 1.2;
    State prev;
    prev.u = Field(g, u0);
    prev.z = Field(g, z0);
    const auto [u_new, z_new] = picard_substep(prev, prev.u, prev.z, p);
    const double expected_z = (z0 / p.k + 0.5 * u0 * p.alpha * p.alpha / z0) / (1.0 / p.k + 0.5 * u0);
    for (double v : z_new.values) CHECK(v == Catch::Approx(expected_z).margin(1e-12));
    for (double v : u_new.values) CHECK(v == Catch::Approx(u0).margin(1e-12));
}

TEST_CASE("substep rejects iterates below the z floor and foreign grids") {
    const Grid g = build_grid({4}, {1.0});
    SchemeParams p = tight_params(0.1);
    State prev;
    prev.u = Field(g, 1.0);
    prev.z = Field(g, 1.0);
    CHECK_THROWS_AS(picard_substep(prev, prev.u, Field(g, 0.01), p), contract_violation_error);
    const Grid other = build_grid({5}, {1.0});
    CHECK_THROWS_AS(picard_substep(prev, Field(other, 1.0), prev.z, p), dimension_error);
}

TEST_CASE("full solver tracks the scalar recursion for constant data") {
    for (double s : {1.0, 2.0}) {
        const Grid g = build_grid({6, 6}, {1.0, 1.0});
        SchemeParams p = tight_params(0.1, s);
        const auto oracle = run_scalar(2.0, 1.0, p.alpha, s, p.m, p.k, 50);
        State cur = initial_state(Field(g, 2.0), Field(g, 1.0), p.alpha);
        for (int n = 1; n <= 50; ++n) {
            const auto sr = solve_step(cur, p);
            cur = sr.state;
            const std::size_t i = static_cast<std::size_t>(n);
            for (double v : cur.u.values)
                CHECK(v == Catch::Approx(oracle.u[i]).margin(1e-10));
            for (double v : cur.z.values)
                CHECK(v == Catch::Approx(oracle.z[i]).margin(1e-10));
        }
    }
}

TEST_CASE("zero cell density stays exactly zero") {
    const Grid g = build_grid({8, 8}, {1.0, 1.0});
    SchemeParams p = tight_params(0.05);
    State cur = initial_state(Field(g, 0.0), bump_field(g, 0.2, 1.0), p.alpha);
    for (int n = 1; n <= 5; ++n) {
        cur = solve_step(cur, p).state;
        for (double v : cur.u.values) CHECK(v == 0.0);
    }
}

TEST_CASE("zero initial signal reduces u to the pure heat step") {
    const Grid g = build_grid({8}, {1.0});
    SchemeParams p = tight_params(0.05);
    State cur = initial_state(bump_field(g, 0.5, 2.0), Field(g, 0.0), p.alpha);
    const Field u_prev = cur.u;
    const auto sr = solve_step(cur, p);
    for (double v : sr.state.z.values) CHECK(v == Catch::Approx(p.alpha).margin(1e-12));
    // residual of (1/k) u - lap u = u_prev / k
    const Field lap = laplacian_apply(g, sr.state.u);
    for (int i = 0; i < g.cell_count(); ++i) {
        const double res = sr.state.u[i] / p.k - lap[i] - u_prev[i] / p.k;
        CHECK(std::abs(res) <= 1e-9 * (1.0 + std::abs(u_prev[i] / p.k)));
    }
}

TEST_CASE("mass is conserved and bounds hold along a bump run") {
    const Grid g = build_grid({12, 12}, {1.0, 1.0});
    SchemeParams p = tight_params(0.02);
    State cur = initial_state(bump_field(g, 0.5, 2.0), bump_field(g, 0.2, 1.0), p.alpha);
    const double mass0 = mass(cur.u);
    const double z0_linf = linf_norm(cur.z);
    double z_linf_prev = z0_linf;
    for (int n = 1; n <= 20; ++n) {
        const auto sr = solve_step(cur, p);
        cur = sr.state;
        CHECK(std::abs(mass(cur.u) - mass0) <= 1e-9 * (1.0 + std::abs(mass0)));
        CHECK(min_value(cur.u) >= -p.bound_tol);
        CHECK(min_value(cur.z) >= p.alpha - 1e-10);
        const double z_linf = linf_norm(cur.z);
        CHECK(z_linf <= z_linf_prev + 1e-10);
        z_linf_prev = z_linf;
    }
}

TEST_CASE("the converged pair is a fixed point of the substep") {
    const Grid g = build_grid({10, 10}, {1.0, 1.0});
    SchemeParams p = tight_params(0.05);
    State prev = initial_state(bump_field(g, 0.5, 2.0), bump_field(g, 0.2, 1.0), p.alpha);
    const auto sr = solve_step(prev, p);
    REQUIRE(sr.halvings_used == 0);
    const auto [u_again, z_again] = picard_substep(prev, sr.state.u, sr.state.z, p);
    const double rel_u =
        linf_diff(u_again, sr.state.u) / std::max(linf_norm(u_again), linf_norm(sr.state.u));
    const double rel_z =
        linf_diff(z_again, sr.state.z) / std::max(linf_norm(z_again), linf_norm(sr.state.z));
    CHECK(rel_u < 2.0 * p.picard_tol);
    CHECK(rel_z < 2.0 * p.picard_tol);
}

TEST_CASE("iteration budget exhaustion reports the residual trace") {
    const Grid g = build_grid({8, 8}, {1.0, 1.0});
    SchemeParams p = tight_params(0.1);
    p.picard_maxit = 1;
    p.step_halving_max = 0;
    State prev = initial_state(bump_field(g, 0.5, 2.0), bump_field(g, 0.2, 1.0), p.alpha);
    try {
        solve_step(prev, p);
        FAIL("expected picard_divergence_error");
    } catch (const picard_divergence_error& e) {
        CHECK_FALSE(e.residuals.empty());
        CHECK(e.residuals.front() > p.picard_tol);
    }
}

TEST_CASE("step halving rescues a starved iteration budget and keeps the time grid") {
    const Grid g = build_grid({6, 6}, {1.0, 1.0});
    SchemeParams p = tight_params(0.2);
    p.picard_tol = 1e-8;
    p.picard_maxit = 6;
    p.step_halving_max = 12;
    State prev = initial_state(bump_field(g, 0.5, 2.0), bump_field(g, 0.2, 1.0), p.alpha);
    const auto sr = solve_step(prev, p);
    CHECK(sr.halvings_used >= 1);
    CHECK(sr.picard_iterations <= p.picard_maxit);
    CHECK(sr.state.t == Catch::Approx(prev.t + p.k).margin(1e-15));
    CHECK(sr.state.n == prev.n + 1);
}

TEST_CASE("damping in (0,1] converges to the same fixed point") {
    const Grid g = build_grid({8, 8}, {1.0, 1.0});
    SchemeParams p = tight_params(0.05);
    State prev = initial_state(bump_field(g, 0.5, 2.0), bump_field(g, 0.2, 1.0), p.alpha);
    const auto plain = solve_step(prev, p);
    SchemeParams damped = p;
    damped.damping = 0.7;
    const auto relaxed = solve_step(prev, damped);
    CHECK(linf_diff(plain.state.u, relaxed.state.u) < 50.0 * p.picard_tol);
    CHECK(linf_diff(plain.state.z, relaxed.state.z) < 50.0 * p.picard_tol);
}

TEST_CASE("solve_step validates the incoming state") {
    const Grid g = build_grid({4}, {1.0});
    SchemeParams p = tight_params(0.1);
    State bad;
    bad.u = Field(g, -1.0);
    bad.z = Field(g, 1.0);
    CHECK_THROWS_AS(solve_step(bad, p), contract_violation_error);
    bad.u = Field(g, 1.0);
    bad.z = Field(g, 0.01);
    CHECK_THROWS_AS(solve_step(bad, p), contract_violation_error);
}
