#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccsim/errors.hpp"
#include "ccsim/grid.hpp"
#include "ccsim/step.hpp"
#include "ccsim/truncation.hpp"

namespace ccsim {

/// Per-step scalars emitted to the diagnostics CSV, in column order.
struct DiagnosticsRecord {
    int n = 0;
    double t = 0.0;
    double mass_u = 0.0;
    double linf_u = 0.0;
    double linf_z = 0.0;
    double linf_v = 0.0;
    double l2_z_sq = 0.0;    // |z^n|_2^2
    double incr_z_sq = 0.0;  // |z^n - z^{n-1}|_2^2
    double grad_z_sq = 0.0;  // face-gradient norm |grad_h z^n|_2^2
    double energy = 0.0;
    double min_u = 0.0;
    double min_z = 0.0;
    int picard_iterations = 0;
    std::optional<double> cross_variant_gap;  // |v_from_z - v_from_u|_2
};

/// Antiderivative of f'_m: for s = 1, f'_m(r) = ln(min(r, m)); for s > 1,
/// f'_m(r) = min(r, m)^(s-1) / (s-1). Closed forms below are the exact
/// integrals from 0, with the s = 1 limit value 0 at r = 0.
inline double f_m_eval(double r, double m, double s) {
    if (r < 0.0) throw contract_violation_error("f_m_eval: r must be nonnegative");
    if (!(m > 0.0)) throw contract_violation_error("f_m_eval: m must be positive");
    if (!(s >= 1.0)) throw contract_violation_error("f_m_eval: s must be >= 1");
    if (s == 1.0) {
        if (r <= m) return r == 0.0 ? 0.0 : r * std::log(r) - r;
        return m * std::log(m) - m + (r - m) * std::log(m);
    }
    const double ss1 = s * (s - 1.0);
    if (r <= m) return pow_s(r, s) / ss1;
    return pow_s(m, s) / ss1 + (r - m) * pow_s(m, s - 1.0) / (s - 1.0);
}

/// Derivative of f_m; for s = 1 only defined for r > 0.
inline double f_m_prime(double r, double m, double s) {
    if (!(m > 0.0)) throw contract_violation_error("f_m_prime: m must be positive");
    if (!(s >= 1.0)) throw contract_violation_error("f_m_prime: s must be >= 1");
    if (s == 1.0) {
        if (r <= 0.0) throw contract_violation_error("f_m_prime: r must be positive for s = 1");
        return std::log(std::min(r, m));
    }
    if (r < 0.0) throw contract_violation_error("f_m_prime: r must be nonnegative");
    return pow_s(std::min(r, m), s - 1.0) / (s - 1.0);
}

/// The two halves of the step energy (s/4) int f_m(u) + (1/2) int |grad z|^2.
/// Negative u values are clamped to zero inside f_m only; the clamped mass
/// is reported and the state itself is never modified.
struct EnergyPieces {
    double fm_integral = 0.0;
    double grad_half = 0.0;
    double total = 0.0;
    double clamped_mass = 0.0;
};

inline EnergyPieces energy(const Field& u, const Field& z, const SchemeParams& p) {
    require_same_grid(u.grid, z, "energy");
    EnergyPieces e;
    const double vol = u.grid.cell_volume();
    for (double v : u.values) {
        if (v < 0.0) {
            e.clamped_mass += -v * vol;
            continue;  // f_m(0) = 0
        }
        e.fm_integral += f_m_eval(v, p.m, p.s) * vol;
    }
    const Field gsq = grad_sq(z.grid, z);
    double g = 0.0;
    for (double v : gsq.values) g += v;
    e.grad_half = 0.5 * g * vol;
    e.total = 0.25 * p.s * e.fm_integral + e.grad_half;
    return e;
}

/// Outcome of the three uniform-estimate checks over a recorded run:
/// 1. cell mass conservation, relative drift <= 1e-9;
/// 2. |z^n|_2^2 + sum |z^j - z^{j-1}|_2^2 <= |z^0|_2^2 (1 + 1e-6);
/// 3. k sum |grad z^j|_2^2 <= 1/(4 alpha^2) |v0 + alpha^2|_2^2 (1 + 1e-3).
struct UniformEstimatesReport {
    bool mass_ok = true;
    bool l2_ok = true;
    bool grad_ok = true;
    double worst_mass_drift = 0.0;  // relative to 1 + |mass(u0)|
    double worst_l2_excess = 0.0;   // relative excess over the z0 budget
    double grad_lhs = 0.0;
    double grad_rhs = 0.0;
    bool passed() const { return mass_ok && l2_ok && grad_ok; }
};

inline UniformEstimatesReport check_uniform_estimates_from_norms(const std::vector<DiagnosticsRecord>& history,
                                              const SchemeParams& p, double z0_l2_sq,
                                              double v0_alpha2_l2_sq, double mass_u0) {
    if (history.empty()) throw contract_violation_error("check_uniform_estimates: empty history");
    UniformEstimatesReport rep;
    const double mass_scale = 1.0 + std::abs(mass_u0);
    double incr_sum = 0.0;
    double grad_sum = 0.0;
    for (const auto& rec : history) {
        const double drift = std::abs(rec.mass_u - mass_u0) / mass_scale;
        rep.worst_mass_drift = std::max(rep.worst_mass_drift, drift);
        if (rec.n == 0) continue;
        incr_sum += rec.incr_z_sq;
        grad_sum += rec.grad_z_sq;
        const double lhs = rec.l2_z_sq + incr_sum;
        const double excess = lhs / z0_l2_sq - 1.0;
        rep.worst_l2_excess = std::max(rep.worst_l2_excess, excess);
    }
    rep.mass_ok = rep.worst_mass_drift <= 1e-9;
    rep.l2_ok = rep.worst_l2_excess <= 1e-6;
    rep.grad_lhs = p.k * grad_sum;
    rep.grad_rhs = v0_alpha2_l2_sq / (4.0 * p.alpha * p.alpha) * (1.0 + 1e-3);
    rep.grad_ok = rep.grad_lhs <= rep.grad_rhs;
    return rep;
}

inline UniformEstimatesReport check_uniform_estimates(const std::vector<DiagnosticsRecord>& history,
                                   const SchemeParams& p, const Field& z0, const Field& v0) {
    Field v0a = v0;
    for (double& v : v0a.values) v += p.alpha * p.alpha;
    const double mass_u0 = history.empty() ? 0.0 : history.front().mass_u;
    return check_uniform_estimates_from_norms(history, p, l2_sq(z0), l2_sq(v0a), mass_u0);
}

/// Discrete convexity inequality (z^n - z^{n-1}) f'(z^n) >= f(z^n) - f(z^{n-1}),
/// checked pointwise over sample pairs (first = z^n, second = z^{n-1}).
struct ConvexityReport {
    int samples = 0;
    int violations = 0;
    double worst = 0.0;  // largest shortfall of lhs below rhs
    bool passed = true;
};

inline ConvexityReport convexity_identity_check(
    const std::vector<std::pair<double, double>>& samples,
    const std::function<double(double)>& f, const std::function<double(double)>& fprime,
    double k = 1.0, double tol = 1e-12) {
    if (!(k > 0.0)) throw contract_violation_error("convexity_identity_check: k must be positive");
    ConvexityReport rep;
    rep.samples = static_cast<int>(samples.size());
    for (const auto& [zn, zp] : samples) {
        const double lhs = (zn - zp) * fprime(zn);
        const double rhs = f(zn) - f(zp);
        const double shortfall = rhs - lhs;
        if (shortfall > tol) {
            ++rep.violations;
            rep.worst = std::max(rep.worst, shortfall);
        }
    }
    rep.passed = rep.violations == 0;
    return rep;
}

/// Reconstruction of a state sequence as a function of time.
enum class ReconstructionMode { piecewise_constant, piecewise_linear };

/// Evaluates the right-constant or the piecewise-linear interpolant of a
/// uniformly spaced sequence of fields. Exact node hits (within a relative
/// snap tolerance) return the stored state for either mode.
class TimeSeries {
public:
    TimeSeries(std::vector<Field> states, double k, ReconstructionMode mode, double t0 = 0.0)
        : states_(std::move(states)), k_(k), mode_(mode), t0_(t0) {
        if (states_.size() < 2)
            throw contract_violation_error("reconstruct_timeseries: need at least 2 states");
        if (!(k_ > 0.0))
            throw contract_violation_error("reconstruct_timeseries: k must be positive");
    }

    double t_begin() const { return t0_; }
    double t_end() const { return t0_ + k_ * static_cast<double>(states_.size() - 1); }
    int levels() const { return static_cast<int>(states_.size()); }

    Field at(double t) const {
        const double last = static_cast<double>(states_.size() - 1);
        double x = (t - t0_) / k_;
        const double snap = 1e-9 * std::max(1.0, std::abs(x));
        if (x < -snap || x > last + snap)
            throw time_range_error("TimeSeries: t outside the recorded range");
        const double rounded = std::round(x);
        if (std::abs(x - rounded) <= snap)
            return states_[static_cast<std::size_t>(rounded)];
        const auto lo = static_cast<std::size_t>(std::floor(x));
        if (mode_ == ReconstructionMode::piecewise_constant)
            return states_[lo + 1];  // value u^n on [t_{n-1}, t_n)
        const double frac = x - std::floor(x);
        Field out = states_[lo];
        for (int i = 0; i < out.size(); ++i)
            out[i] = (1.0 - frac) * states_[lo][i] + frac * states_[lo + 1][i];
        return out;
    }

private:
    std::vector<Field> states_;
    double k_;
    ReconstructionMode mode_;
    double t0_;
};

inline TimeSeries reconstruct_timeseries(std::vector<Field> states, double k,
                                         ReconstructionMode mode, double t0 = 0.0) {
    return TimeSeries(std::move(states), k, mode, t0);
}

} // namespace ccsim
