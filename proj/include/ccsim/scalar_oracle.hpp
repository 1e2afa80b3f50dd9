#pragma once

// Independent scalar recursions for spatially constant data. This header
// deliberately shares no code with the field solver: it is the brute-force
// reference the field path is tested against, so it only uses <cmath>.

#include <cmath>
#include <cstddef>
#include <vector>

namespace ccsim {

/// Per-step scalar sequences of the constant-data scheme.
struct ScalarTrace {
    std::vector<double> u;         // constant in n
    std::vector<double> z;         // index 0 is z0 = sqrt(v0 + alpha^2)
    std::vector<double> v_from_z;  // z_n^2 - alpha^2
    std::vector<double> v_from_u;  // v_{n-1} / (1 + k c)
    double k = 0.0;
    double alpha = 0.0;
    double s = 1.0;
    double m = 1.0;
};

/// Run the scheme for constant fields, where every gradient term vanishes.
/// The z-update collapses to the positive root of
///   (1/k + c/2) z^2 - (z_{n-1}/k) z - c alpha^2 / 2 = 0,  c = min(u0, m)^s,
/// solved with the sign-aware quadratic formula to avoid cancellation for
/// small c alpha^2.
inline ScalarTrace run_scalar(double u0, double v0, double alpha, double s, double m,
                              double k, int steps) {
    ScalarTrace t;
    t.k = k;
    t.alpha = alpha;
    t.s = s;
    t.m = m;
    const double cu = u0 < m ? u0 : m;
    const double c = cu == 0.0 ? 0.0 : std::exp(s * std::log(cu));
    double z = std::sqrt(v0 + alpha * alpha);
    double vu = v0;
    t.u.assign(static_cast<std::size_t>(steps) + 1, u0);
    t.z.push_back(z);
    t.v_from_z.push_back(z * z - alpha * alpha);
    t.v_from_u.push_back(vu);
    for (int n = 1; n <= steps; ++n) {
        if (c != 0.0) {
            const double a = 1.0 / k + 0.5 * c;
            const double b = -z / k;
            const double c0 = -0.5 * c * alpha * alpha;
            const double disc = b * b - 4.0 * a * c0;
            // b < 0 always, so the stable root pair is q/a (positive) and c0/q.
            const double q = 0.5 * (-b + std::sqrt(disc));
            z = q / a;
        }  // c == 0: the positive root is exactly z_{n-1}
        vu = vu / (1.0 + k * c);
        t.z.push_back(z);
        t.v_from_z.push_back(z * z - alpha * alpha);
        t.v_from_u.push_back(vu);
    }
    return t;
}

/// Closed-form solution of the constant-data continuous v-equation,
/// v(t) = v0 exp(-u0^s t), used to measure temporal convergence order.
inline double exact_ode_reference(double u0, double v0, double s, double t) {
    const double c = u0 == 0.0 ? 0.0 : std::exp(s * std::log(u0));
    return v0 * std::exp(-c * t);
}

} // namespace ccsim
