#pragma once

#include <algorithm>
#include <cmath>

#include "ccsim/errors.hpp"
#include "ccsim/grid.hpp"

namespace ccsim {

/// Truncation levels used by the scheme: u is cut above m, z below alpha.
struct TruncationParams {
    double m = 1.0;
    double alpha = 1e-2;
};

/// Upper truncation: min(u, m).
inline double t_upper(double u, double m) { return std::min(u, m); }

/// Lower-upper truncation: clamp to [0, m].
inline double t_band(double u, double m) { return std::clamp(u, 0.0, m); }

/// Lower truncation: max(z, alpha).
inline double t_lower(double z, double alpha) { return std::max(z, alpha); }

inline Field t_upper(Field u, double m) {
    for (double& v : u.values) v = t_upper(v, m);
    return u;
}

inline Field t_band(Field u, double m) {
    for (double& v : u.values) v = t_band(v, m);
    return u;
}

inline Field t_lower(Field z, double alpha) {
    for (double& v : z.values) v = t_lower(v, alpha);
    return z;
}

/// w^s for w >= 0, s >= 1. Integer-exponent fast paths are exact; other
/// exponents go through exp(s log w) with a zero-input short circuit.
inline double pow_s(double w, double s) {
    if (w < 0.0)
        throw contract_violation_error("pow_s: negative base");
    if (w == 0.0) return 0.0;
    if (s == 1.0) return w;
    if (s == 2.0) return w * w;
    if (s == 3.0) return w * w * w;
    return std::exp(s * std::log(w));
}

inline Field pow_s(Field w, double s) {
    for (double& v : w.values) v = pow_s(v, s);
    return w;
}

} // namespace ccsim
