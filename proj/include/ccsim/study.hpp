#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ccsim/config.hpp"
#include "ccsim/diagnostics.hpp"
#include "ccsim/scalar_oracle.hpp"
#include "ccsim/simulation.hpp"

namespace ccsim {

/// One refinement level of a study table. diff_* measure the distance to
/// the next level on the coarsest common time grid; order_* compare two
/// consecutive diffs. Missing entries are NaN.
struct StudyRow {
    int level = 0;
    double k = 0.0;
    double m = 0.0;
    double diff_u = std::numeric_limits<double>::quiet_NaN();
    double diff_z = std::numeric_limits<double>::quiet_NaN();
    double order_u = std::numeric_limits<double>::quiet_NaN();
    double order_z = std::numeric_limits<double>::quiet_NaN();
    double v_gap = std::numeric_limits<double>::quiet_NaN();      // per level
    double exact_err = std::numeric_limits<double>::quiet_NaN();  // constant scenarios only
};

struct StudyTable {
    std::string name;
    std::vector<StudyRow> rows;
};

struct StudyResult {
    StudyTable k_table;      // k halved, m fixed
    StudyTable m_table;      // m doubled, k fixed
    StudyTable joint_table;  // k halved and m doubled together
    bool complete = true;
    std::string failure;
};

namespace detail {

struct LevelRun {
    double k = 0.0;
    double m = 0.0;
    std::optional<RunResult> result;
    std::exception_ptr error;
};

/// L2(time, space) distance of two runs' piecewise-constant reconstructions,
/// evaluated on the coarsest common time grid.
inline std::pair<double, double> common_grid_distance(const RunResult& a, const RunResult& b,
                                                      double k_common) {
    std::vector<Field> ua, za, ub, zb;
    for (const auto& st : a.retained) {
        ua.push_back(st.u);
        za.push_back(st.z);
    }
    for (const auto& st : b.retained) {
        ub.push_back(st.u);
        zb.push_back(st.z);
    }
    TimeSeries su(std::move(ua), k_common, ReconstructionMode::piecewise_constant);
    TimeSeries sz(std::move(za), k_common, ReconstructionMode::piecewise_constant);
    TimeSeries tu(std::move(ub), k_common, ReconstructionMode::piecewise_constant);
    TimeSeries tz(std::move(zb), k_common, ReconstructionMode::piecewise_constant);
    double du = 0.0, dz = 0.0;
    const int n = std::min(su.levels(), tu.levels()) - 1;
    for (int j = 1; j <= n; ++j) {
        const double t = k_common * j;
        du += k_common * l2_sq_diff(su.at(t), tu.at(t));
        dz += k_common * l2_sq_diff(sz.at(t), tz.at(t));
    }
    return {std::sqrt(du), std::sqrt(dz)};
}

inline void run_levels_concurrently(std::vector<LevelRun>& levels, const RunConfig& base,
                                    int jobs) {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= levels.size()) return;
            LevelRun& lr = levels[i];
            try {
                RunConfig cfg = base;
                cfg.scheme.k = lr.k;
                cfg.scheme.m = lr.m;
                cfg.record_v_gap = true;
                RunOptions opts;
                // Retain states on the coarsest common time grid.
                opts.retain_every = static_cast<int>(std::llround(base.scheme.k / lr.k));
                lr.result = run_simulation(cfg, opts);
            } catch (...) {
                lr.error = std::current_exception();
            }
        }
    };
    if (jobs <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t nthreads = std::min(static_cast<std::size_t>(jobs), levels.size());
    pool.reserve(nthreads);
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

inline StudyTable build_table(const std::string& name, const std::vector<LevelRun>& levels,
                              const RunConfig& base, bool constant_scenario,
                              std::string& failure) {
    StudyTable table;
    table.name = name;
    std::vector<double> du, dz;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const LevelRun& lr = levels[i];
        if (lr.error) {
            if (failure.empty()) {
                try {
                    std::rethrow_exception(lr.error);
                } catch (const std::exception& e) {
                    failure = name + " level " + std::to_string(i) + ": " + e.what();
                }
            }
            break;
        }
        StudyRow row;
        row.level = static_cast<int>(i);
        row.k = lr.k;
        row.m = lr.m;
        row.v_gap = lr.result->v_gap_l2_time;
        if (constant_scenario && lr.result->final_v_from_u) {
            const double exact = exact_ode_reference(base.u0.value, base.v0.value,
                                                     base.scheme.s, base.T_final);
            row.exact_err = std::abs(max_value(*lr.result->final_v_from_u) - exact);
        }
        table.rows.push_back(row);
    }
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
        const auto [eu, ez] = common_grid_distance(*levels[i].result, *levels[i + 1].result,
                                                   base.scheme.k);
        table.rows[i].diff_u = eu;
        table.rows[i].diff_z = ez;
        du.push_back(eu);
        dz.push_back(ez);
        if (i > 0) {
            if (du[i - 1] > 0.0 && du[i] > 0.0)
                table.rows[i].order_u = std::log2(du[i - 1] / du[i]);
            if (dz[i - 1] > 0.0 && dz[i] > 0.0)
                table.rows[i].order_z = std::log2(dz[i - 1] / dz[i]);
        }
    }
    return table;
}

} // namespace detail

/// Empirical refinement study: runs the scenario at k, k/2, k/4, ... and at
/// m, 2m, 4m, ..., plus the joint sweep refining both together, and reports
/// successive-difference norms, observed orders and the cross-variant v gap
/// per level. A failed run aborts its table; completed rows are preserved.
inline StudyResult convergence_study(const RunConfig& base, int k_levels, int m_levels,
                                     int jobs = 1) {
    if (k_levels < 2 || m_levels < 2)
        throw config_error("convergence_study: k_levels and m_levels must be >= 2");
    const bool constant_scenario = base.u0.kind == InitialDataSpec::Kind::constant &&
                                   base.v0.kind == InitialDataSpec::Kind::constant;

    auto make_levels = [&](int count, bool refine_k, bool refine_m) {
        std::vector<detail::LevelRun> levels(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            levels[static_cast<std::size_t>(i)].k =
                refine_k ? base.scheme.k / static_cast<double>(1 << i) : base.scheme.k;
            levels[static_cast<std::size_t>(i)].m =
                refine_m ? base.scheme.m * static_cast<double>(1 << i) : base.scheme.m;
        }
        return levels;
    };

    auto k_runs = make_levels(k_levels, true, false);
    auto m_runs = make_levels(m_levels, false, true);
    auto joint_runs = make_levels(std::min(k_levels, m_levels), true, true);

    std::vector<detail::LevelRun> all;
    all.reserve(k_runs.size() + m_runs.size() + joint_runs.size());
    for (auto& r : k_runs) all.push_back(std::move(r));
    for (auto& r : m_runs) all.push_back(std::move(r));
    for (auto& r : joint_runs) all.push_back(std::move(r));
    detail::run_levels_concurrently(all, base, jobs);
    for (std::size_t i = 0; i < k_runs.size(); ++i) k_runs[i] = std::move(all[i]);
    for (std::size_t i = 0; i < m_runs.size(); ++i) m_runs[i] = std::move(all[k_runs.size() + i]);
    for (std::size_t i = 0; i < joint_runs.size(); ++i)
        joint_runs[i] = std::move(all[k_runs.size() + m_runs.size() + i]);

    StudyResult out;
    out.k_table = detail::build_table("k_refinement", k_runs, base, constant_scenario, out.failure);
    out.m_table = detail::build_table("m_refinement", m_runs, base, constant_scenario, out.failure);
    out.joint_table =
        detail::build_table("joint_refinement", joint_runs, base, constant_scenario, out.failure);
    out.complete = out.failure.empty();
    return out;
}

} // namespace ccsim
