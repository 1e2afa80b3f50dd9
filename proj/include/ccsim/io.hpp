#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ccsim/diagnostics.hpp"
#include "ccsim/errors.hpp"
#include "ccsim/grid.hpp"
#include "ccsim/step.hpp"

namespace ccsim {

namespace detail {

/// 17 significant digits round-trip binary doubles exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Field snapshots: plain text, bit-exact round trip.
// Header line: ndim n1 [n2 [n3]] h1 [h2 [h3]] t, then one value per line in
// row-major order.
// ---------------------------------------------------------------------------

inline void write_snapshot(const std::string& path, const Field& f, double t) {
    std::ofstream out(path);
    if (!out) throw error("write_snapshot: cannot open '" + path + "'");
    const Grid& g = f.grid;
    out << g.ndim;
    for (int d = 0; d < g.ndim; ++d) out << ' ' << g.dims[d];
    for (int d = 0; d < g.ndim; ++d) out << ' ' << detail::format_double(g.spacing[d]);
    out << ' ' << detail::format_double(t) << '\n';
    for (double v : f.values) out << detail::format_double(v) << '\n';
    if (!out) throw error("write_snapshot: write failed for '" + path + "'");
}

inline std::pair<Field, double> read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("read_snapshot: cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw error("read_snapshot: empty file '" + path + "'");
    std::istringstream h(header);
    int ndim = 0;
    if (!(h >> ndim) || ndim < 1 || ndim > 3)
        throw error("read_snapshot: bad header in '" + path + "'");
    std::vector<int> dims(static_cast<std::size_t>(ndim));
    std::vector<double> spacing(static_cast<std::size_t>(ndim));
    for (auto& d : dims)
        if (!(h >> d)) throw error("read_snapshot: bad header in '" + path + "'");
    for (auto& s : spacing)
        if (!(h >> s)) throw error("read_snapshot: bad header in '" + path + "'");
    double t = 0.0;
    if (!(h >> t)) throw error("read_snapshot: bad header in '" + path + "'");
    std::vector<double> extent(static_cast<std::size_t>(ndim));
    for (int d = 0; d < ndim; ++d) extent[static_cast<std::size_t>(d)] = spacing[static_cast<std::size_t>(d)] * dims[static_cast<std::size_t>(d)];
    Grid g = build_grid(dims, extent);
    // Re-impose the exact spacing from the file; extent above only rebuilds
    // the box metadata and may round differently.
    for (int d = 0; d < ndim; ++d) g.spacing[d] = spacing[static_cast<std::size_t>(d)];
    Field f(g, 0.0);
    for (int i = 0; i < g.cell_count(); ++i)
        if (!(in >> f[i])) throw error("read_snapshot: truncated data in '" + path + "'");
    return {std::move(f), t};
}

// ---------------------------------------------------------------------------
// Diagnostics CSV: fixed header, one row per recorded step.
// ---------------------------------------------------------------------------

inline const char* diagnostics_csv_header() {
    return "n,t,mass_u,linf_u,linf_z,linf_v,l2_z_sq,incr_z_sq,grad_z_sq,energy,min_u,min_z,"
           "picard_iterations,cross_variant_gap";
}

inline std::string diagnostics_csv_row(const DiagnosticsRecord& r) {
    std::ostringstream out;
    out << r.n << ',' << detail::format_double(r.t) << ',' << detail::format_double(r.mass_u)
        << ',' << detail::format_double(r.linf_u) << ',' << detail::format_double(r.linf_z)
        << ',' << detail::format_double(r.linf_v) << ',' << detail::format_double(r.l2_z_sq)
        << ',' << detail::format_double(r.incr_z_sq) << ',' << detail::format_double(r.grad_z_sq)
        << ',' << detail::format_double(r.energy) << ',' << detail::format_double(r.min_u)
        << ',' << detail::format_double(r.min_z) << ',' << r.picard_iterations << ','
        << (r.cross_variant_gap ? detail::format_double(*r.cross_variant_gap) : "nan");
    return out.str();
}

inline void write_diagnostics_csv(const std::string& path,
                                  const std::vector<DiagnosticsRecord>& history) {
    std::ofstream out(path);
    if (!out) throw error("write_diagnostics_csv: cannot open '" + path + "'");
    out << diagnostics_csv_header() << '\n';
    for (const auto& r : history) out << diagnostics_csv_row(r) << '\n';
    if (!out) throw error("write_diagnostics_csv: write failed for '" + path + "'");
}

inline std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("read_diagnostics_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw error("read_diagnostics_csv: empty file '" + path + "'");
    if (line != diagnostics_csv_header())
        throw error("read_diagnostics_csv: unexpected header in '" + path + "'");
    std::vector<DiagnosticsRecord> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 14)
            throw error("read_diagnostics_csv: bad row at line " + std::to_string(lineno));
        DiagnosticsRecord r;
        r.n = std::stoi(cells[0]);
        r.t = std::stod(cells[1]);
        r.mass_u = std::stod(cells[2]);
        r.linf_u = std::stod(cells[3]);
        r.linf_z = std::stod(cells[4]);
        r.linf_v = std::stod(cells[5]);
        r.l2_z_sq = std::stod(cells[6]);
        r.incr_z_sq = std::stod(cells[7]);
        r.grad_z_sq = std::stod(cells[8]);
        r.energy = std::stod(cells[9]);
        r.min_u = std::stod(cells[10]);
        r.min_z = std::stod(cells[11]);
        r.picard_iterations = std::stoi(cells[12]);
        const double gap = std::stod(cells[13]);
        if (!std::isnan(gap)) r.cross_variant_gap = gap;
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Run metadata sidecar: the initial-data norms the uniform-estimate checks need, which
// are not recoverable from the CSV columns alone.
// ---------------------------------------------------------------------------

struct RunMeta {
    SchemeParams scheme;
    double mass_u0 = 0.0;
    double z0_l2_sq = 0.0;
    double v0_alpha2_l2_sq = 0.0;
    double z0_linf = 0.0;
    double v0_linf = 0.0;
};

inline void write_run_meta(const std::string& path, const RunMeta& meta) {
    nlohmann::json j;
    j["scheme"] = {{"k", meta.scheme.k},
                   {"m", meta.scheme.m},
                   {"alpha", meta.scheme.alpha},
                   {"s", meta.scheme.s},
                   {"flux", meta.scheme.flux_spec.scheme == FaceScheme::central ? "central" : "upwind"},
                   {"picard_tol", meta.scheme.picard_tol},
                   {"picard_maxit", meta.scheme.picard_maxit},
                   {"step_halving_max", meta.scheme.step_halving_max},
                   {"bound_tol", meta.scheme.bound_tol},
                   {"damping", meta.scheme.damping},
                   {"linear_tol", meta.scheme.linear_tol},
                   {"linear_maxit", meta.scheme.linear_maxit}};
    j["initial"] = {{"mass_u0", meta.mass_u0},
                    {"z0_l2_sq", meta.z0_l2_sq},
                    {"v0_alpha2_l2_sq", meta.v0_alpha2_l2_sq},
                    {"z0_linf", meta.z0_linf},
                    {"v0_linf", meta.v0_linf}};
    std::ofstream out(path);
    if (!out) throw error("write_run_meta: cannot open '" + path + "'");
    out << j.dump(2) << '\n';
}

inline RunMeta read_run_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("read_run_meta: cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    RunMeta meta;
    const auto& s = j.at("scheme");
    meta.scheme.k = s.at("k").get<double>();
    meta.scheme.m = s.at("m").get<double>();
    meta.scheme.alpha = s.at("alpha").get<double>();
    meta.scheme.s = s.at("s").get<double>();
    meta.scheme.flux_spec.scheme =
        s.at("flux").get<std::string>() == "upwind" ? FaceScheme::upwind : FaceScheme::central;
    meta.scheme.picard_tol = s.at("picard_tol").get<double>();
    meta.scheme.picard_maxit = s.at("picard_maxit").get<int>();
    meta.scheme.step_halving_max = s.at("step_halving_max").get<int>();
    meta.scheme.bound_tol = s.at("bound_tol").get<double>();
    meta.scheme.damping = s.at("damping").get<double>();
    meta.scheme.linear_tol = s.at("linear_tol").get<double>();
    meta.scheme.linear_maxit = s.at("linear_maxit").get<int>();
    const auto& i = j.at("initial");
    meta.mass_u0 = i.at("mass_u0").get<double>();
    meta.z0_l2_sq = i.at("z0_l2_sq").get<double>();
    meta.v0_alpha2_l2_sq = i.at("v0_alpha2_l2_sq").get<double>();
    meta.z0_linf = i.at("z0_linf").get<double>();
    meta.v0_linf = i.at("v0_linf").get<double>();
    return meta;
}

} // namespace ccsim
