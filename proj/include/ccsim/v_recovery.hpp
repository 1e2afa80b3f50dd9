#pragma once

#include <string>

#include "ccsim/elliptic.hpp"
#include "ccsim/errors.hpp"
#include "ccsim/grid.hpp"
#include "ccsim/step.hpp"
#include "ccsim/truncation.hpp"

namespace ccsim {

/// Which recovery of the chemical concentration populates State.v.
enum class VVariant { from_z, from_u };

/// Algebraic recovery v = z^2 - alpha^2.
inline Field v_from_z(const Field& z, double alpha, double bound_tol = 1e-8) {
    if (min_value(z) < alpha - bound_tol)
        throw contract_violation_error("v_from_z: z must stay above alpha - bound_tol");
    Field v = z;
    const double alpha_sq = alpha * alpha;
    for (double& val : v.values) val = val * val - alpha_sq;
    return v;
}

/// Linear recovery: solve (1/k + T(u)^s) v - lap v = v_prev / k.
/// Uses the same band-truncated u as the scheme; on the admissible set
/// (u >= 0) this coincides with the plain upper truncation and keeps the
/// reaction coefficient nonnegative when u carries solver-level negatives.
inline Field v_from_u(const Field& v_prev, const Field& u, const SchemeParams& p) {
    p.validate();
    require_same_grid(v_prev.grid, u, "v_from_u");
    if (min_value(v_prev) < -p.bound_tol)
        throw contract_violation_error("v_from_u: previous v must be nonnegative");
    HelmholtzProblem vp;
    vp.grid = v_prev.grid;
    vp.sigma = 1.0 / p.k;
    vp.c = pow_s(t_band(u, p.m), p.s);
    vp.rhs = Field(v_prev.grid, 0.0);
    for (int i = 0; i < v_prev.size(); ++i) vp.rhs[i] = v_prev[i] / p.k;
    return solve(vp, p.linear_tol, p.linear_maxit, &v_prev).first;
}

} // namespace ccsim
