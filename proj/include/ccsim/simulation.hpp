#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccsim/config.hpp"
#include "ccsim/diagnostics.hpp"
#include "ccsim/grid.hpp"
#include "ccsim/step.hpp"
#include "ccsim/truncation.hpp"
#include "ccsim/v_recovery.hpp"

namespace ccsim {

/// Boundedness monitor for the step energy. The envelope constant is a
/// configurable heuristic (energy_lambda); excursions are reported, they do
/// not abort a run.
struct EnergyMonitorReport {
    bool finite = true;
    double e0 = 0.0;
    double max_e = 0.0;
    double envelope = 0.0;
    int excursions = 0;
    int first_excursion = -1;
    bool within_envelope() const { return finite && excursions == 0; }
};

struct RunResult {
    Grid grid;
    SchemeParams scheme;  // with alpha resolved
    std::vector<DiagnosticsRecord> history;
    UniformEstimatesReport estimates;
    EnergyMonitorReport energy_report;
    double mass_u0 = 0.0;
    double z0_l2_sq = 0.0;
    double v0_alpha2_l2_sq = 0.0;
    double z0_linf = 0.0;
    double v0_linf = 0.0;
    double v_gap_l2_time = 0.0;  // sqrt(sum_n k |v_z - v_u|_2^2)
    int total_halvings = 0;
    Field u0, z0, v0;
    std::vector<State> retained;             // states at the retention cadence
    std::optional<Field> final_v_from_u;     // tracked when the gap is recorded
    int exit_code = 0;                       // 0 ok, 2 invariant breach
};

struct RunOptions {
    int retain_every = 0;  // 0: keep no states; j: keep every j-th level plus n = 0
    std::function<void(const State&)> on_state;  // called on n = 0 and every accepted step
};

/// Time loop: solve_step + v recovery + diagnostics for every step of the
/// configured horizon. Throws on step failure or invariant breach; the
/// returned exit_code reflects the uniform-estimate checks.
inline RunResult run_simulation(const RunConfig& cfg, const RunOptions& opts = {}) {
    detail::validate_config(cfg);
    RunResult res;
    res.grid = build_grid(cfg.dims, cfg.extent);
    res.u0 = sample_initial(res.grid, cfg.u0, "u0");
    res.v0 = sample_initial(res.grid, cfg.v0, "v0");
    res.scheme = cfg.scheme;
    if (cfg.alpha_auto) res.scheme.alpha = default_alpha(res.v0);
    const SchemeParams& p = res.scheme;
    p.validate();

    const double alpha_sq = p.alpha * p.alpha;
    res.z0 = res.v0;
    for (double& v : res.z0.values) v = std::sqrt(v + alpha_sq);
    res.mass_u0 = mass(res.u0);
    res.z0_l2_sq = l2_sq(res.z0);
    res.z0_linf = linf_norm(res.z0);
    res.v0_linf = linf_norm(res.v0);
    {
        Field v0a = res.v0;
        for (double& v : v0a.values) v += alpha_sq;
        res.v0_alpha2_l2_sq = l2_sq(v0a);
    }

    const bool track_vu = cfg.record_v_gap || cfg.v_variant == VVariant::from_u;
    const int steps = cfg.step_count();

    State cur;
    cur.u = res.u0;
    cur.z = res.z0;
    cur.v = res.v0;
    cur.t = 0.0;
    cur.n = 0;

    Field v_u_prev = res.v0;
    double gap_sq_time = 0.0;

    auto make_record = [&](const State& st, const Field* v_u, int picard_iters,
                           double incr) {
        DiagnosticsRecord r;
        r.n = st.n;
        r.t = st.t;
        r.mass_u = mass(st.u);
        r.linf_u = linf_norm(st.u);
        r.linf_z = linf_norm(st.z);
        r.linf_v = st.v ? linf_norm(*st.v) : 0.0;
        r.l2_z_sq = l2_sq(st.z);
        r.incr_z_sq = incr;
        const EnergyPieces e = energy(st.u, st.z, p);
        r.grad_z_sq = 2.0 * e.grad_half;
        r.energy = e.total;
        r.min_u = min_value(st.u);
        r.min_z = min_value(st.z);
        r.picard_iterations = picard_iters;
        if (v_u && st.v) r.cross_variant_gap = std::sqrt(l2_sq_diff(*st.v, *v_u));
        return r;
    };

    // The n = 0 record: both recoveries coincide with v0 up to roundoff.
    {
        Field v_z0 = v_from_z(res.z0, p.alpha, p.bound_tol);
        const Field* vu0 = track_vu ? &res.v0 : nullptr;
        State initial = cur;
        initial.v = cfg.v_variant == VVariant::from_z ? v_z0 : res.v0;
        DiagnosticsRecord r0;
        if (track_vu) {
            // gap between the two recoveries of the initial datum
            State tmp = initial;
            tmp.v = v_z0;
            r0 = make_record(tmp, vu0, 0, 0.0);
        } else {
            r0 = make_record(initial, nullptr, 0, 0.0);
        }
        r0.linf_v = linf_norm(*initial.v);
        res.history.push_back(r0);
        cur = std::move(initial);
    }
    if (opts.retain_every > 0) res.retained.push_back(cur);
    if (opts.on_state) opts.on_state(cur);

    EnergyMonitorReport& em = res.energy_report;
    em.e0 = res.history.front().energy;
    em.max_e = em.e0;
    em.envelope = em.e0 + cfg.energy_lambda * res.v0_alpha2_l2_sq / (4.0 * alpha_sq);

    for (int n = 1; n <= steps; ++n) {
        StepResult sr;
        try {
            sr = solve_step(cur, p);
        } catch (const picard_divergence_error& e) {
            throw picard_divergence_error(
                "step " + std::to_string(n) + ": " + e.what(), e.residuals);
        } catch (const bound_violation_error& e) {
            throw bound_violation_error("step " + std::to_string(n) + ": " + e.what(), e.cell,
                                        e.magnitude);
        }
        res.total_halvings += sr.halvings_used;

        Field v_z = v_from_z(sr.state.z, p.alpha, p.bound_tol);
        std::optional<Field> v_u;
        if (track_vu) {
            v_u = v_from_u(v_u_prev, sr.state.u, p);
            v_u_prev = *v_u;
        }
        const double incr = l2_sq_diff(sr.state.z, cur.z);
        sr.state.v = cfg.v_variant == VVariant::from_z ? v_z : *v_u;

        DiagnosticsRecord r;
        {
            State tmp;
            tmp.u = sr.state.u;
            tmp.z = sr.state.z;
            tmp.v = v_z;  // the gap column always measures v_from_z vs v_from_u
            tmp.t = sr.state.t;
            tmp.n = sr.state.n;
            r = make_record(tmp, v_u ? &*v_u : nullptr, sr.picard_iterations, incr);
            r.linf_v = linf_norm(*sr.state.v);
        }
        if (r.cross_variant_gap)
            gap_sq_time += p.k * (*r.cross_variant_gap) * (*r.cross_variant_gap);
        res.history.push_back(r);

        if (!std::isfinite(r.energy)) em.finite = false;
        em.max_e = std::max(em.max_e, r.energy);
        if (r.energy > em.envelope) {
            ++em.excursions;
            if (em.first_excursion < 0) em.first_excursion = n;
        }

        cur = std::move(sr.state);
        if (opts.retain_every > 0 && n % opts.retain_every == 0) res.retained.push_back(cur);
        if (opts.on_state) opts.on_state(cur);
    }

    if (track_vu) res.final_v_from_u = v_u_prev;
    res.v_gap_l2_time = std::sqrt(gap_sq_time);
    res.estimates = check_uniform_estimates_from_norms(res.history, p, res.z0_l2_sq, res.v0_alpha2_l2_sq,
                                         res.mass_u0);
    res.exit_code = res.estimates.passed() ? 0 : 2;
    return res;
}

/// Rows to emit at the configured cadence (always keeps n = 0 and the final
/// step so the run summary is visible in subsampled CSVs).
inline std::vector<DiagnosticsRecord> cadence_filter(const std::vector<DiagnosticsRecord>& history,
                                                     int cadence) {
    if (cadence <= 1) return history;
    std::vector<DiagnosticsRecord> out;
    for (const auto& r : history)
        if (r.n % cadence == 0 || r.n == history.back().n) out.push_back(r);
    return out;
}

} // namespace ccsim
