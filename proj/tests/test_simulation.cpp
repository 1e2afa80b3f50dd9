#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "ccsim/io.hpp"
#include "ccsim/scalar_oracle.hpp"
#include "ccsim/simulation.hpp"
#include "ccsim/study.hpp"

using namespace ccsim;

namespace {

RunConfig homogeneous_config(double k, double T) {
    RunConfig cfg = parse_config(R"(
[grid]
dims = 6 6
extent = 1.0 1.0
[scenario]
preset = homogeneous
[scheme]
k = 0.1
m = 10
alpha = 0.1
s = 1
picard_tol = 1e-12
linear_tol = 1e-14
[run]
T_final = 1.0
)");
    cfg.scheme.k = k;
    cfg.T_final = T;
    return cfg;
}

RunConfig gaussian_config() {
    return parse_config(R"(
[grid]
dims = 16 16
extent = 1.0 1.0
[scenario]
preset = gaussian
[scheme]
k = 0.02
m = 100
alpha = 0.1
s = 1
picard_tol = 1e-12
linear_tol = 1e-13
[run]
T_final = 0.4
)");
}

} // namespace

TEST_CASE("homogeneous run reproduces the scalar trace in the diagnostics") {
    const RunConfig cfg = homogeneous_config(0.1, 1.0);
    const RunResult res = run_simulation(cfg);
    REQUIRE(res.history.size() == 11);
    const auto oracle = run_scalar(2.0, 1.0, 0.1, 1.0, 10.0, 0.1, 10);
    for (std::size_t n = 0; n < res.history.size(); ++n) {
        const auto& r = res.history[n];
        CHECK(r.linf_z == Catch::Approx(oracle.z[n]).margin(1e-10));
        CHECK(r.linf_v == Catch::Approx(oracle.v_from_z[n]).margin(1e-10));
        CHECK(r.mass_u == Catch::Approx(2.0).margin(1e-10));
        // the gap column measures |v_z - v_u|_2 over the unit box
        REQUIRE(r.cross_variant_gap.has_value());
        CHECK(*r.cross_variant_gap ==
              Catch::Approx(std::abs(oracle.v_from_z[n] - oracle.v_from_u[n])).margin(1e-9));
    }
    CHECK(res.estimates.passed());
    CHECK(res.exit_code == 0);
    // no gradients beyond linear-solver noise: the budget's left side is ~0
    CHECK(res.estimates.grad_lhs <= 1e-20);
}

TEST_CASE("zero initial signal kills every chemotaxis flux") {
    RunConfig cfg = parse_config(R"(
[grid]
dims = 8 8
extent = 1.0 1.0
[scenario]
preset = zero_v
[scheme]
k = 0.05
m = 10
alpha = 0.1
picard_tol = 1e-12
[run]
T_final = 0.5
)");
    const RunResult res = run_simulation(cfg);
    for (const auto& r : res.history) {
        CHECK(r.grad_z_sq <= 1e-24);
        CHECK(std::abs(r.linf_z - 0.1) <= 1e-12);
        CHECK(std::abs(r.min_z - 0.1) <= 1e-12);
    }
    CHECK(res.estimates.passed());
    // z frozen at alpha means the L2 identity is an equality chain
    CHECK(std::abs(res.estimates.worst_l2_excess) <= 1e-12);
    // u spreads by pure diffusion, so its mass is conserved and sup decays
    CHECK(res.history.back().linf_u < res.history.front().linf_u);
}

TEST_CASE("gaussian run passes the uniform-estimate checks and keeps energy finite") {
    const RunConfig cfg = gaussian_config();
    RunOptions opts;
    opts.retain_every = 5;
    const RunResult res = run_simulation(cfg, opts);
    CHECK(res.estimates.passed());
    CHECK(res.exit_code == 0);
    CHECK(res.energy_report.finite);
    CHECK(res.energy_report.within_envelope());
    CHECK(res.retained.size() == 5);  // n = 0, 5, 10, 15, 20
    for (const auto& st : res.retained) REQUIRE(st.v.has_value());
    // v stays inside the maximum-principle box
    for (const auto& r : res.history) {
        CHECK(r.linf_v <= res.v0_linf + 1e-8);
        CHECK(r.min_u >= -1e-8);
    }
}

TEST_CASE("identical configs give bit-identical diagnostics") {
    const RunConfig cfg = gaussian_config();
    const RunResult a = run_simulation(cfg);
    const RunResult b = run_simulation(cfg);
    REQUIRE(a.history.size() == b.history.size());
    std::string sa, sb;
    for (const auto& r : a.history) sa += diagnostics_csv_row(r) + "\n";
    for (const auto& r : b.history) sb += diagnostics_csv_row(r) + "\n";
    CHECK(sa == sb);
}

TEST_CASE("cadence filter keeps the endpoints") {
    const RunConfig cfg = homogeneous_config(0.1, 1.0);
    const RunResult res = run_simulation(cfg);
    const auto filtered = cadence_filter(res.history, 4);
    REQUIRE(filtered.size() == 4);  // n = 0, 4, 8, 10
    CHECK(filtered.front().n == 0);
    CHECK(filtered[1].n == 4);
    CHECK(filtered[2].n == 8);
    CHECK(filtered.back().n == 10);
}

TEST_CASE("refinement study on constant data shows first order and inactive truncation") {
    RunConfig cfg = homogeneous_config(0.1, 1.0);
    const StudyResult study = convergence_study(cfg, 3, 2, 1);
    REQUIRE(study.complete);

    // m >= sup u for every level: the m-refinement rows must be identical
    REQUIRE(study.m_table.rows.size() == 2);
    CHECK(study.m_table.rows[0].diff_u == 0.0);
    CHECK(study.m_table.rows[0].diff_z == 0.0);

    // k-refinement of the backward Euler chain is first order
    REQUIRE(study.k_table.rows.size() == 3);
    CHECK(study.k_table.rows[0].diff_z > study.k_table.rows[1].diff_z);
    CHECK(study.k_table.rows[1].order_z == Catch::Approx(1.0).margin(0.35));

    // constant scenario carries the exponential-reference column
    CHECK(std::isfinite(study.k_table.rows[0].exact_err));
    const double e0 = study.k_table.rows[0].exact_err;
    const double e1 = study.k_table.rows[1].exact_err;
    const double e2 = study.k_table.rows[2].exact_err;
    CHECK(std::log2(e0 / e1) == Catch::Approx(1.0).margin(0.2));
    CHECK(std::log2(e1 / e2) == Catch::Approx(1.0).margin(0.2));

    // joint refinement decreases monotonically as well
    REQUIRE(study.joint_table.rows.size() == 2);
    CHECK(study.joint_table.rows[0].diff_z > 0.0);
}

TEST_CASE("study results do not depend on the worker count") {
    RunConfig cfg = homogeneous_config(0.1, 0.5);
    const StudyResult serial = convergence_study(cfg, 2, 2, 1);
    const StudyResult parallel = convergence_study(cfg, 2, 2, 4);
    REQUIRE(serial.complete);
    REQUIRE(parallel.complete);
    REQUIRE(serial.k_table.rows.size() == parallel.k_table.rows.size());
    for (std::size_t i = 0; i < serial.k_table.rows.size(); ++i) {
        const double su = serial.k_table.rows[i].diff_u;
        const double pu = parallel.k_table.rows[i].diff_u;
        CHECK((su == pu || (std::isnan(su) && std::isnan(pu))));
        CHECK(serial.k_table.rows[i].v_gap == parallel.k_table.rows[i].v_gap);
    }
}

TEST_CASE("study validates its level counts") {
    RunConfig cfg = homogeneous_config(0.1, 0.5);
    CHECK_THROWS_AS(convergence_study(cfg, 1, 2, 1), config_error);
    CHECK_THROWS_AS(convergence_study(cfg, 2, 1, 1), config_error);
}
