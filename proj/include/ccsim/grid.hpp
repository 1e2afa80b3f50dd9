#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ccsim/errors.hpp"

namespace ccsim {

/// Uniform rectilinear grid of cell-centered values, 1 to 3 axes.
///
/// The domain is the box [0, extent_d] per axis, split into dims_d cells of
/// width spacing_d = extent_d / dims_d. Homogeneous Neumann boundaries are
/// realized by zero-flux boundary faces in every discrete operator below.
/// Unused axes are padded with one cell of unit width so that all loops can
/// run over three nested index ranges regardless of dimensionality.
struct Grid {
    int ndim = 0;
    std::array<int, 3> dims{1, 1, 1};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::array<double, 3> extent{1.0, 1.0, 1.0};

    int cell_count() const { return dims[0] * dims[1] * dims[2]; }
    double cell_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

    /// Row-major linear index, last declared axis fastest.
    int index(int i0, int i1 = 0, int i2 = 0) const {
        return (i0 * dims[1] + i1) * dims[2] + i2;
    }

    std::array<int, 3> strides() const {
        return {dims[1] * dims[2], dims[2], 1};
    }

    /// Cell-center coordinate along an axis.
    double center(int axis, int i) const {
        return (static_cast<double>(i) + 0.5) * spacing[axis];
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.ndim == b.ndim && a.dims == b.dims && a.spacing == b.spacing;
    }
};

inline Grid build_grid(const std::vector<int>& dims, const std::vector<double>& extent) {
    if (dims.empty() || dims.size() > 3)
        throw invalid_domain_error("build_grid: need 1 to 3 axes, got " + std::to_string(dims.size()));
    if (extent.size() != dims.size())
        throw invalid_domain_error("build_grid: dims and extent must have the same number of axes");
    Grid g;
    g.ndim = static_cast<int>(dims.size());
    for (int d = 0; d < g.ndim; ++d) {
        if (dims[d] < 1)
            throw invalid_domain_error("build_grid: cell count must be >= 1 on axis " + std::to_string(d));
        if (!(extent[d] > 0.0) || !std::isfinite(extent[d]))
            throw invalid_domain_error("build_grid: extent must be positive on axis " + std::to_string(d));
        g.dims[d] = dims[d];
        g.extent[d] = extent[d];
        g.spacing[d] = extent[d] / static_cast<double>(dims[d]);
    }
    return g;
}

/// Cell-centered scalar field. Owns its values and a copy of the grid it
/// lives on, so it is a self-contained value that can move between threads.
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0)
        : grid(g), values(static_cast<std::size_t>(g.cell_count()), fill) {}

    int size() const { return static_cast<int>(values.size()); }
    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

inline void require_same_grid(const Grid& g, const Field& w, const char* op) {
    if (!(w.grid == g) || w.size() != g.cell_count())
        throw dimension_error(std::string(op) + ": field does not live on the given grid");
}

inline void ensure_finite(const Field& w, const char* op) {
    for (double v : w.values)
        if (!std::isfinite(v))
            throw error(std::string(op) + ": produced a non-finite value");
}

/// How the advected coefficient is sampled at cell faces.
enum class FaceScheme { central, upwind };

struct FaceFluxSpec {
    FaceScheme scheme = FaceScheme::central;
};

namespace detail {

/// Visit every interior face along one axis; f(a, b) receives the linear
/// indices of the two adjacent cells (b on the positive side).
template <class F>
inline void for_each_face(const Grid& g, int axis, F&& f) {
    const auto s = g.strides();
    const int n0 = g.dims[0], n1 = g.dims[1], n2 = g.dims[2];
    std::array<int, 3> lim{n0, n1, n2};
    if (lim[axis] < 2) return;
    lim[axis] -= 1;
    for (int i0 = 0; i0 < lim[0]; ++i0)
        for (int i1 = 0; i1 < lim[1]; ++i1)
            for (int i2 = 0; i2 < lim[2]; ++i2) {
                const int a = (i0 * n1 + i1) * n2 + i2;
                f(a, a + s[axis]);
            }
}

} // namespace detail

/// Flux-form discrete Laplacian with zero-flux boundary faces.
/// Second-order 3/5/7-point stencil; constants map to zero and the
/// volume-weighted cell sum of the result telescopes to zero exactly.
inline Field laplacian_apply(const Grid& g, const Field& w) {
    require_same_grid(g, w, "laplacian_apply");
    Field out(g, 0.0);
    for (int d = 0; d < g.ndim; ++d) {
        const double inv_h2 = 1.0 / (g.spacing[d] * g.spacing[d]);
        detail::for_each_face(g, d, [&](int a, int b) {
            const double diff = (w[b] - w[a]) * inv_h2;
            out[a] += diff;
            out[b] -= diff;
        });
    }
    ensure_finite(out, "laplacian_apply");
    return out;
}

/// Cell-centered |grad w|^2 built from face gradients: per axis the squares
/// of the two adjacent face gradients are averaged (boundary faces carry
/// gradient zero, consistent with the Neumann condition). Nonnegative by
/// construction and summation-compatible with laplacian_apply:
///   sum_i grad_sq(w)_i vol = -sum_i laplacian_apply(w)_i w_i vol  exactly.
inline Field grad_sq(const Grid& g, const Field& w) {
    require_same_grid(g, w, "grad_sq");
    Field out(g, 0.0);
    for (int d = 0; d < g.ndim; ++d) {
        const double inv_h = 1.0 / g.spacing[d];
        detail::for_each_face(g, d, [&](int a, int b) {
            const double grad = (w[b] - w[a]) * inv_h;
            const double half_sq = 0.5 * grad * grad;
            out[a] += half_sq;
            out[b] += half_sq;
        });
    }
    ensure_finite(out, "grad_sq");
    return out;
}

namespace detail {

inline double face_coefficient(double c_lo, double c_hi, double face_grad, FaceScheme scheme) {
    if (scheme == FaceScheme::central) return 0.5 * (c_lo + c_hi);
    // Donor cell: the transport velocity of the advected density is the
    // negative of the face gradient, so the upstream side sits where the
    // gradient points to.
    if (face_grad > 0.0) return c_hi;
    if (face_grad < 0.0) return c_lo;
    return 0.5 * (c_lo + c_hi);
}

} // namespace detail

/// Flux form of div(coeff * grad(z^2)) with zero boundary fluxes.
/// coeff must be nonnegative (already truncated). The volume-weighted sum
/// of the result is exactly zero.
inline Field div_chemotaxis_flux(const Grid& g, const Field& coeff, const Field& z,
                                 FaceFluxSpec spec = {}) {
    require_same_grid(g, coeff, "div_chemotaxis_flux");
    require_same_grid(g, z, "div_chemotaxis_flux");
    for (double c : coeff.values)
        if (c < 0.0)
            throw contract_violation_error("div_chemotaxis_flux: coefficient must be nonnegative");
    Field out(g, 0.0);
    for (int d = 0; d < g.ndim; ++d) {
        const double inv_h = 1.0 / g.spacing[d];
        detail::for_each_face(g, d, [&](int a, int b) {
            const double grad = (z[b] * z[b] - z[a] * z[a]) * inv_h;
            const double cf = detail::face_coefficient(coeff[a], coeff[b], grad, spec.scheme);
            const double flux_over_h = cf * grad * inv_h;
            out[a] += flux_over_h;
            out[b] -= flux_over_h;
        });
    }
    ensure_finite(out, "div_chemotaxis_flux");
    return out;
}

/// Linearization of the chemotaxis divergence used inside the fixed-point
/// substep: div(coeff * 2 z_w grad(z)) with the face weight taken as the
/// arithmetic mean of z_w. With z_w == z the face flux reduces to
/// coeff_face * face-gradient of z^2, so fixed points of the substep satisfy
/// the same discrete equation as div_chemotaxis_flux.
inline Field div_chemotaxis_flux_linearized(const Grid& g, const Field& coeff,
                                            const Field& z_weight, const Field& z,
                                            FaceFluxSpec spec = {}) {
    require_same_grid(g, coeff, "div_chemotaxis_flux_linearized");
    require_same_grid(g, z_weight, "div_chemotaxis_flux_linearized");
    require_same_grid(g, z, "div_chemotaxis_flux_linearized");
    for (double c : coeff.values)
        if (c < 0.0)
            throw contract_violation_error("div_chemotaxis_flux_linearized: coefficient must be nonnegative");
    Field out(g, 0.0);
    for (int d = 0; d < g.ndim; ++d) {
        const double inv_h = 1.0 / g.spacing[d];
        detail::for_each_face(g, d, [&](int a, int b) {
            const double grad = (z_weight[a] + z_weight[b]) * (z[b] - z[a]) * inv_h;
            const double cf = detail::face_coefficient(coeff[a], coeff[b], grad, spec.scheme);
            const double flux_over_h = cf * grad * inv_h;
            out[a] += flux_over_h;
            out[b] -= flux_over_h;
        });
    }
    ensure_finite(out, "div_chemotaxis_flux_linearized");
    return out;
}

// Volume-weighted and pointwise reductions used throughout.

inline double linf_norm(const Field& w) {
    double m = 0.0;
    for (double v : w.values) m = std::max(m, std::abs(v));
    return m;
}

inline double min_value(const Field& w) {
    double m = w.values.empty() ? 0.0 : w.values.front();
    for (double v : w.values) m = std::min(m, v);
    return m;
}

inline double max_value(const Field& w) {
    double m = w.values.empty() ? 0.0 : w.values.front();
    for (double v : w.values) m = std::max(m, v);
    return m;
}

/// Volume-weighted squared L2 norm: sum_i w_i^2 vol.
inline double l2_sq(const Field& w) {
    double s = 0.0;
    for (double v : w.values) s += v * v;
    return s * w.grid.cell_volume();
}

/// Volume-weighted squared L2 norm of a difference.
inline double l2_sq_diff(const Field& a, const Field& b) {
    require_same_grid(a.grid, b, "l2_sq_diff");
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s * a.grid.cell_volume();
}

inline double linf_diff(const Field& a, const Field& b) {
    require_same_grid(a.grid, b, "linf_diff");
    double m = 0.0;
    for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace ccsim
