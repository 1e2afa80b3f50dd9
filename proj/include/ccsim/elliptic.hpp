#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ccsim/errors.hpp"
#include "ccsim/grid.hpp"

namespace ccsim {

/// Screened-Poisson Neumann problem (sigma + c(x)) w - lap(w) = f.
/// sigma > 0 and c >= 0 make the operator symmetric positive definite and,
/// under the flux-form stencil, an M-matrix (nonpositive off-diagonals,
/// diagonally dominant rows), which is what yields the discrete maximum
/// principle used by the scheme.
struct HelmholtzProblem {
    Grid grid;
    double sigma = 1.0;
    Field c;
    Field rhs;

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw contract_violation_error("HelmholtzProblem: sigma must be positive");
        require_same_grid(grid, c, "HelmholtzProblem");
        require_same_grid(grid, rhs, "HelmholtzProblem");
        for (double v : c.values)
            if (v < 0.0 || !std::isfinite(v))
                throw contract_violation_error("HelmholtzProblem: reaction coefficient must be nonnegative");
    }
};

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;  // relative L2 residual against |f|_2
    bool converged = false;
};

namespace detail {

/// y = (sigma + c) x - lap(x), fused for the CG hot loop.
inline void helmholtz_apply(const HelmholtzProblem& p, const std::vector<double>& x,
                            std::vector<double>& y) {
    const Grid& g = p.grid;
    const int n = g.cell_count();
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = (p.sigma + p.c[i]) * x[static_cast<std::size_t>(i)];
    for (int d = 0; d < g.ndim; ++d) {
        const double inv_h2 = 1.0 / (g.spacing[d] * g.spacing[d]);
        for_each_face(g, d, [&](int a, int b) {
            const double diff = (x[static_cast<std::size_t>(b)] - x[static_cast<std::size_t>(a)]) * inv_h2;
            y[static_cast<std::size_t>(a)] -= diff;
            y[static_cast<std::size_t>(b)] += diff;
        });
    }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

} // namespace detail

/// Solve with diagonally preconditioned conjugate gradients, matrix free.
/// Stops when the true residual satisfies |f - A w|_2 <= tol |f|_2.
/// maxit == 0 selects the default budget of 10 * cell count.
/// An optional initial guess warm-starts the iteration.
inline std::pair<Field, SolveReport> solve(const HelmholtzProblem& p, double tol = 1e-11,
                                           int maxit = 0, const Field* initial_guess = nullptr) {
    p.validate();
    const Grid& g = p.grid;
    const int n = g.cell_count();
    if (maxit <= 0) maxit = 10 * n;

    Field x = initial_guess ? *initial_guess : Field(g, 0.0);
    if (initial_guess) require_same_grid(g, *initial_guess, "solve");

    const double rhs_norm = detail::norm2(p.rhs.values);
    SolveReport report;
    if (rhs_norm == 0.0) {
        report.converged = true;
        return {Field(g, 0.0), report};
    }

    // Jacobi diagonal of (sigma + c) - lap.
    std::vector<double> diag(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] = p.sigma + p.c[i];
    for (int d = 0; d < g.ndim; ++d) {
        const double inv_h2 = 1.0 / (g.spacing[d] * g.spacing[d]);
        detail::for_each_face(g, d, [&](int a, int b) {
            diag[static_cast<std::size_t>(a)] += inv_h2;
            diag[static_cast<std::size_t>(b)] += inv_h2;
        });
    }

    std::vector<double> r(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n)),
        q(static_cast<std::size_t>(n)), ap(static_cast<std::size_t>(n));
    detail::helmholtz_apply(p, x.values, ap);
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = p.rhs[i] - ap[static_cast<std::size_t>(i)];

    auto refresh_true_residual = [&]() {
        detail::helmholtz_apply(p, x.values, ap);
        for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = p.rhs[i] - ap[static_cast<std::size_t>(i)];
        return detail::norm2(r);
    };

    double res = detail::norm2(r);
    if (res <= tol * rhs_norm) {
        report.residual = res / rhs_norm;
        report.converged = true;
        ensure_finite(x, "solve");
        return {std::move(x), report};
    }

    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] / diag[static_cast<std::size_t>(i)];
    q = z;
    double rz = detail::dot(r, z);
    int it = 0;
    while (it < maxit) {
        ++it;
        detail::helmholtz_apply(p, q, ap);
        const double qap = detail::dot(q, ap);
        if (qap <= 0.0)
            throw solver_failure_error("solve: lost positive definiteness", it, res / rhs_norm);
        const double alpha = rz / qap;
        for (std::size_t i = 0; i < r.size(); ++i) {
            x.values[i] += alpha * q[i];
            r[i] -= alpha * ap[i];
        }
        res = detail::norm2(r);
        if (res <= tol * rhs_norm) {
            // The recursive residual can drift; accept only on the true one.
            res = refresh_true_residual();
            if (res <= tol * rhs_norm) break;
            for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / diag[i];
            q = z;
            rz = detail::dot(r, z);
            continue;
        }
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / diag[i];
        const double rz_new = detail::dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < q.size(); ++i) q[i] = z[i] + beta * q[i];
    }

    report.iterations = it;
    report.residual = res / rhs_norm;
    report.converged = res <= tol * rhs_norm;
    if (!report.converged)
        throw solver_failure_error("solve: no convergence within " + std::to_string(maxit) +
                                       " iterations (relative residual " + std::to_string(report.residual) + ")",
                                   report.iterations, report.residual);
    ensure_finite(x, "solve");
    return {std::move(x), report};
}

/// Enclosure check from inverse positivity of the M-matrix. For c >= 0 the
/// solution is trapped between data-determined constants; in particular
/// f >= 0 implies w >= 0 up to solver slack.
struct BoundReport {
    double lower = 0.0;
    double upper = 0.0;
    double min_w = 0.0;
    double max_w = 0.0;
    double slack = 0.0;
    double worst_violation = 0.0;  // largest excess beyond [lower-slack, upper+slack]
    int violations = 0;
    bool passed = true;
};

inline BoundReport max_principle_check(const HelmholtzProblem& p, const Field& w,
                                       double tol = 1e-11) {
    p.validate();
    require_same_grid(p.grid, w, "max_principle_check");
    const double f_min = min_value(p.rhs);
    const double f_max = max_value(p.rhs);
    const double c_max = max_value(p.c);
    BoundReport rep;
    rep.lower = f_min >= 0.0 ? f_min / (p.sigma + c_max) : f_min / p.sigma;
    rep.upper = f_max >= 0.0 ? f_max / p.sigma : f_max / (p.sigma + c_max);
    rep.min_w = min_value(w);
    rep.max_w = max_value(w);
    rep.slack = 10.0 * tol * detail::norm2(p.rhs.values) / p.sigma;
    for (double v : w.values) {
        const double below = rep.lower - rep.slack - v;
        const double above = v - rep.upper - rep.slack;
        const double excess = std::max(below, above);
        if (excess > 0.0) {
            ++rep.violations;
            rep.worst_violation = std::max(rep.worst_violation, excess);
        }
    }
    rep.passed = rep.violations == 0;
    return rep;
}

/// Dense matrix of the operator obtained by probing with unit vectors.
/// Intended for small grids (assembly is O(N^2) applies of cost O(N)).
inline std::vector<std::vector<double>> assemble_dense(const HelmholtzProblem& p) {
    p.validate();
    const int n = p.grid.cell_count();
    std::vector<std::vector<double>> a(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<double> e(static_cast<std::size_t>(n), 0.0), col(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        e[static_cast<std::size_t>(j)] = 1.0;
        detail::helmholtz_apply(p, e, col);
        for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = col[static_cast<std::size_t>(i)];
        e[static_cast<std::size_t>(j)] = 0.0;
    }
    return a;
}

} // namespace ccsim
