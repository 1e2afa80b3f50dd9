#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccsim/elliptic.hpp"
#include "ccsim/errors.hpp"
#include "ccsim/grid.hpp"
#include "ccsim/truncation.hpp"

namespace ccsim {

/// All scheme knobs in one value.
struct SchemeParams {
    double k = 0.1;        // time step
    double m = 100.0;      // upper truncation level for u
    double alpha = 1e-2;   // lower truncation level for z
    double s = 1.0;        // consumption exponent, >= 1
    FaceFluxSpec flux_spec{};
    double picard_tol = 1e-10;  // relative L-inf on both components
    int picard_maxit = 100;
    int step_halving_max = 8;
    double bound_tol = 1e-8;
    double damping = 1.0;       // in (0, 1]; 1 is plain fixed-point iteration
    double linear_tol = 1e-12;  // inner elliptic solves
    int linear_maxit = 0;       // 0 -> solver default of 10 * cell count

    void validate() const {
        if (!(k > 0.0)) throw contract_violation_error("SchemeParams: k must be positive");
        if (!(m > 0.0)) throw contract_violation_error("SchemeParams: m must be positive");
        if (!(alpha > 0.0)) throw contract_violation_error("SchemeParams: alpha must be positive");
        if (!(s >= 1.0)) throw contract_violation_error("SchemeParams: s must be >= 1");
        if (!(picard_tol > 0.0)) throw contract_violation_error("SchemeParams: picard_tol must be positive");
        if (!(bound_tol > 0.0)) throw contract_violation_error("SchemeParams: bound_tol must be positive");
        if (!(damping > 0.0 && damping <= 1.0))
            throw contract_violation_error("SchemeParams: damping must lie in (0, 1]");
        if (picard_maxit < 1) throw contract_violation_error("SchemeParams: picard_maxit must be >= 1");
        if (step_halving_max < 0)
            throw contract_violation_error("SchemeParams: step_halving_max must be >= 0");
    }
};

/// One time level. v is populated by the recovery step, not by solve_step.
struct State {
    Field u;
    Field z;
    std::optional<Field> v;
    double t = 0.0;
    int n = 0;
};

struct StepResult {
    State state;
    int picard_iterations = 0;  // worst sub-step count, <= picard_maxit
    int halvings_used = 0;
    std::vector<double> residuals;  // relative L-inf change per iteration
};

/// Total cell mass, sum of values times cell volume.
inline double mass(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.cell_volume();
}

namespace detail {

inline double rel_linf_change(const Field& next, const Field& prev) {
    const double num = linf_diff(next, prev);
    if (num == 0.0) return 0.0;
    const double den = std::max(linf_norm(next), linf_norm(prev));
    return num / std::max(den, 1e-300);
}

/// One application of the decoupled map: given the previous time level and
/// the current iterate (u_bar, z_bar), solve the z-equation first and then
/// the u-equation with the fresh z.
inline std::pair<Field, Field> apply_step_map(const Field& u_prev, const Field& z_prev,
                                              const Field& u_bar, const Field& z_bar,
                                              const SchemeParams& p, double k) {
    const Grid& g = u_prev.grid;
    const double alpha_sq = p.alpha * p.alpha;
    const Field tz = t_lower(z_bar, p.alpha);
    const Field tu = t_band(u_bar, p.m);
    const Field tu_s = pow_s(tu, p.s);

    // z-solve: (1/k) z - lap z + (1/2) tu_s z
    //        = grad_sq(z_bar)/tz + (1/2) tu_s alpha^2 / tz + z_prev / k,
    // the alpha^2/tz consumption sub-term taken explicitly to keep the
    // system symmetric positive definite.
    HelmholtzProblem zp;
    zp.grid = g;
    zp.sigma = 1.0 / k;
    zp.c = Field(g, 0.0);
    zp.rhs = Field(g, 0.0);
    const Field gsq = grad_sq(g, z_bar);
    for (int i = 0; i < g.cell_count(); ++i) {
        zp.c[i] = 0.5 * tu_s[i];
        zp.rhs[i] = gsq[i] / tz[i] + 0.5 * tu_s[i] * alpha_sq / tz[i] + z_prev[i] / k;
    }
    Field z_new = solve(zp, p.linear_tol, p.linear_maxit, &z_bar).first;

    // u-solve: (1/k) u - lap u = div(2 tu z_bar grad z_new) + u_prev / k.
    HelmholtzProblem up;
    up.grid = g;
    up.sigma = 1.0 / k;
    up.c = Field(g, 0.0);
    up.rhs = div_chemotaxis_flux_linearized(g, tu, z_bar, z_new, p.flux_spec);
    for (int i = 0; i < g.cell_count(); ++i) up.rhs[i] += u_prev[i] / k;
    Field u_new = solve(up, p.linear_tol, p.linear_maxit, &u_bar).first;

    return {std::move(u_new), std::move(z_new)};
}

struct SubstepOutcome {
    Field u;
    Field z;
    int iterations = 0;
    bool converged = false;
};

inline SubstepOutcome run_picard(const Field& u_prev, const Field& z_prev,
                                 const SchemeParams& p, double k,
                                 std::vector<double>& trace) {
    Field u_bar = u_prev;
    Field z_bar = z_prev;
    SubstepOutcome out;
    for (int it = 1; it <= p.picard_maxit; ++it) {
        auto [u_new, z_new] = apply_step_map(u_prev, z_prev, u_bar, z_bar, p, k);
        if (p.damping < 1.0) {
            for (int i = 0; i < u_new.size(); ++i) {
                u_new[i] = u_bar[i] + p.damping * (u_new[i] - u_bar[i]);
                z_new[i] = z_bar[i] + p.damping * (z_new[i] - z_bar[i]);
            }
        }
        const double rel = std::max(rel_linf_change(u_new, u_bar), rel_linf_change(z_new, z_bar));
        trace.push_back(rel);
        u_bar = std::move(u_new);
        z_bar = std::move(z_new);
        out.iterations = it;
        if (rel < p.picard_tol) {
            out.converged = true;
            break;
        }
    }
    out.u = std::move(u_bar);
    out.z = std::move(z_bar);
    return out;
}

inline void check_substep_bounds(const Field& u, const Field& z, double z_prev_linf,
                                 const SchemeParams& p) {
    for (int i = 0; i < u.size(); ++i) {
        if (u[i] < -p.bound_tol)
            throw bound_violation_error("solve_step: u dropped below 0 at cell " + std::to_string(i) +
                                            " by " + std::to_string(-u[i]),
                                        i, -u[i]);
        if (z[i] < p.alpha - p.bound_tol)
            throw bound_violation_error("solve_step: z dropped below alpha at cell " + std::to_string(i) +
                                            " by " + std::to_string(p.alpha - z[i]),
                                        i, p.alpha - z[i]);
        if (z[i] > z_prev_linf + p.bound_tol)
            throw bound_violation_error("solve_step: z exceeded |z_prev|_inf at cell " + std::to_string(i) +
                                            " by " + std::to_string(z[i] - z_prev_linf),
                                        i, z[i] - z_prev_linf);
    }
}

} // namespace detail

/// One application of the decoupled fixed-point map from the iterate
/// (u_bar, z_bar), using prev as the time level n-1. Fixed points of this
/// map satisfy the nonlinear time-discrete equations.
inline std::pair<Field, Field> picard_substep(const State& prev, const Field& u_bar,
                                              const Field& z_bar, const SchemeParams& p) {
    p.validate();
    require_same_grid(prev.u.grid, prev.z, "picard_substep");
    require_same_grid(prev.u.grid, u_bar, "picard_substep");
    require_same_grid(prev.u.grid, z_bar, "picard_substep");
    if (min_value(z_bar) < p.alpha - p.bound_tol)
        throw contract_violation_error("picard_substep: z_bar must stay above alpha - bound_tol");
    return detail::apply_step_map(prev.u, prev.z, u_bar, z_bar, p, p.k);
}

/// Advance one time level: iterate the decoupled map until the relative
/// L-inf change of both components drops below picard_tol. On stagnation
/// the interval is re-integrated with a halved sub-step, up to
/// step_halving_max times; the reported time grid is unchanged.
inline StepResult solve_step(const State& prev, const SchemeParams& p) {
    p.validate();
    require_same_grid(prev.u.grid, prev.z, "solve_step");
    if (min_value(prev.u) < -p.bound_tol)
        throw contract_violation_error("solve_step: previous u violates nonnegativity");
    if (min_value(prev.z) < p.alpha - p.bound_tol)
        throw contract_violation_error("solve_step: previous z violates the alpha bound");

    const double z_prev_linf = linf_norm(prev.z);
    std::vector<double> last_trace;
    for (int halvings = 0; halvings <= p.step_halving_max; ++halvings) {
        const int nsub = 1 << halvings;
        const double k_sub = p.k / static_cast<double>(nsub);
        Field u_cur = prev.u;
        Field z_cur = prev.z;
        std::vector<double> trace;
        int iterations = 0;
        bool ok = true;
        double z_linf_chain = z_prev_linf;
        for (int sub = 0; sub < nsub && ok; ++sub) {
            auto outcome = detail::run_picard(u_cur, z_cur, p, k_sub, trace);
            iterations = std::max(iterations, outcome.iterations);
            if (!outcome.converged) {
                ok = false;
                break;
            }
            detail::check_substep_bounds(outcome.u, outcome.z, z_linf_chain, p);
            u_cur = std::move(outcome.u);
            z_cur = std::move(outcome.z);
            z_linf_chain = linf_norm(z_cur);
        }
        if (ok) {
            StepResult result;
            result.state.u = std::move(u_cur);
            result.state.z = std::move(z_cur);
            result.state.t = prev.t + p.k;
            result.state.n = prev.n + 1;
            result.picard_iterations = iterations;
            result.halvings_used = halvings;
            result.residuals = std::move(trace);
            return result;
        }
        last_trace = std::move(trace);
    }
    throw picard_divergence_error(
        "solve_step: fixed-point iteration stagnated after exhausting " +
            std::to_string(p.step_halving_max) + " halvings",
        std::move(last_trace));
}

} // namespace ccsim
