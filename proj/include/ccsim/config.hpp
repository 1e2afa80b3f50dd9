#pragma once

#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ccsim/errors.hpp"
#include "ccsim/grid.hpp"
#include "ccsim/step.hpp"
#include "ccsim/v_recovery.hpp"

namespace ccsim {

/// Initial-data shape for one of u0, v0. Centers and widths can be stored
/// as fractions of the domain extent (presets) or absolute (user keys).
struct InitialDataSpec {
    enum class Kind { constant, gaussian, cosine };
    Kind kind = Kind::constant;
    double value = 0.0;  // constant
    double baseline = 0.0;
    double amplitude = 0.0;
    std::array<double, 3> center{0.5, 0.5, 0.5};
    bool center_absolute = false;  // false: center holds fractions of extent
    double width = 0.15;
    bool width_absolute = false;  // false: width is a fraction of min extent
    std::array<int, 3> modes{1, 1, 1};  // cosine
};

struct ScenarioPreset {
    std::string name;
    InitialDataSpec u0;
    InitialDataSpec v0;
};

struct RunConfig {
    std::vector<int> dims;
    std::vector<double> extent;
    std::string preset;
    InitialDataSpec u0;
    InitialDataSpec v0;
    SchemeParams scheme;
    bool alpha_auto = true;  // alpha = 1e-2 max(1, sqrt(|v0|_inf)) unless set
    VVariant v_variant = VVariant::from_z;
    bool record_v_gap = true;
    double T_final = 1.0;
    int cadence = 1;  // diagnostics row every this many steps
    std::string output_csv = "diagnostics.csv";
    int snapshot_every = 0;  // 0 disables field snapshots
    std::string snapshot_prefix = "snap";
    double energy_lambda = 100.0;

    int step_count() const {
        const double ratio = T_final / scheme.k;
        return static_cast<int>(std::llround(ratio));
    }
};

inline ScenarioPreset scenario_preset(const std::string& name) {
    ScenarioPreset p;
    p.name = name;
    auto gauss = [](double base, double amp, double cfrac, double wfrac) {
        InitialDataSpec s;
        s.kind = InitialDataSpec::Kind::gaussian;
        s.baseline = base;
        s.amplitude = amp;
        s.center = {cfrac, cfrac, cfrac};
        s.width = wfrac;
        return s;
    };
    auto constant = [](double v) {
        InitialDataSpec s;
        s.kind = InitialDataSpec::Kind::constant;
        s.value = v;
        return s;
    };
    auto cosine = [](double base, double amp) {
        InitialDataSpec s;
        s.kind = InitialDataSpec::Kind::cosine;
        s.baseline = base;
        s.amplitude = amp;
        return s;
    };
    if (name == "homogeneous") {
        p.u0 = constant(2.0);
        p.v0 = constant(1.0);
    } else if (name == "gaussian") {
        p.u0 = gauss(0.5, 2.0, 0.5, 0.15);
        p.v0 = gauss(0.2, 1.0, 0.35, 0.2);
    } else if (name == "cosine") {
        p.u0 = cosine(1.5, 0.5);
        p.v0 = cosine(0.5, 0.25);
    } else if (name == "zero_v") {
        p.u0 = gauss(0.5, 2.0, 0.5, 0.15);
        p.v0 = constant(0.0);
    } else if (name == "zero_u") {
        p.u0 = constant(0.0);
        p.v0 = gauss(0.0, 1.0, 0.5, 0.2);
    } else {
        throw config_error("unknown scenario preset '" + name + "'");
    }
    return p;
}

/// Sample an initial-data spec at cell centers and validate nonnegativity.
inline Field sample_initial(const Grid& g, const InitialDataSpec& spec, const std::string& name) {
    Field f(g, 0.0);
    double min_extent = g.extent[0];
    for (int d = 1; d < g.ndim; ++d) min_extent = std::min(min_extent, g.extent[d]);
    const double width = spec.width_absolute ? spec.width : spec.width * min_extent;
    if (spec.kind != InitialDataSpec::Kind::constant && !(width > 0.0) &&
        spec.kind == InitialDataSpec::Kind::gaussian)
        throw config_error(name + ": gaussian width must be positive");
    std::array<double, 3> center{};
    for (int d = 0; d < 3; ++d)
        center[d] = spec.center_absolute ? spec.center[d] : spec.center[d] * g.extent[d];

    const auto strides = g.strides();
    for (int i0 = 0; i0 < g.dims[0]; ++i0)
        for (int i1 = 0; i1 < g.dims[1]; ++i1)
            for (int i2 = 0; i2 < g.dims[2]; ++i2) {
                const std::array<int, 3> idx{i0, i1, i2};
                double val = 0.0;
                switch (spec.kind) {
                    case InitialDataSpec::Kind::constant:
                        val = spec.value;
                        break;
                    case InitialDataSpec::Kind::gaussian: {
                        double q = 0.0;
                        for (int d = 0; d < g.ndim; ++d) {
                            const double dx = g.center(d, idx[d]) - center[d];
                            q += dx * dx;
                        }
                        val = spec.baseline + spec.amplitude * std::exp(-q / (2.0 * width * width));
                        break;
                    }
                    case InitialDataSpec::Kind::cosine: {
                        double prod = 1.0;
                        for (int d = 0; d < g.ndim; ++d)
                            prod *= std::cos(spec.modes[d] * M_PI * g.center(d, idx[d]) / g.extent[d]);
                        val = spec.baseline + spec.amplitude * prod;
                        break;
                    }
                }
                f[idx[0] * strides[0] + idx[1] * strides[1] + idx[2]] = val;
            }
    if (min_value(f) < 0.0)
        throw config_error(name + ": initial data must be nonnegative pointwise");
    return f;
}

namespace detail {

struct ConfigCursor {
    int line = 0;
    std::string section;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double_value(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    double x;
    if (!(in >> x) || !(in >> std::ws).eof())
        throw config_error("value of '" + key + "' is not a number: '" + v + "'");
    return x;
}

inline int parse_int_value(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    long long x;
    if (!(in >> x) || !(in >> std::ws).eof())
        throw config_error("value of '" + key + "' is not an integer: '" + v + "'");
    return static_cast<int>(x);
}

inline bool parse_bool_value(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error("value of '" + key + "' is not a boolean: '" + v + "'");
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    std::vector<double> out;
    double x;
    while (in >> x) out.push_back(x);
    if (!in.eof() || out.empty())
        throw config_error("value of '" + key + "' is not a list of numbers: '" + v + "'");
    return out;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    std::vector<int> out;
    long long x;
    while (in >> x) out.push_back(static_cast<int>(x));
    if (!in.eof() || out.empty())
        throw config_error("value of '" + key + "' is not a list of integers: '" + v + "'");
    return out;
}

inline void set_initial_key(InitialDataSpec& spec, const std::string& qualified,
                            const std::string& field, const std::string& value) {
    if (field == "kind") {
        if (value == "constant") spec.kind = InitialDataSpec::Kind::constant;
        else if (value == "gaussian") spec.kind = InitialDataSpec::Kind::gaussian;
        else if (value == "cosine") spec.kind = InitialDataSpec::Kind::cosine;
        else throw config_error("value of '" + qualified + "' must be constant, gaussian or cosine");
    } else if (field == "value") {
        spec.value = parse_double_value(qualified, value);
    } else if (field == "baseline") {
        spec.baseline = parse_double_value(qualified, value);
    } else if (field == "amplitude") {
        spec.amplitude = parse_double_value(qualified, value);
    } else if (field == "center") {
        const auto xs = parse_double_list(qualified, value);
        if (xs.size() > 3) throw config_error("'" + qualified + "' takes at most 3 coordinates");
        for (std::size_t d = 0; d < xs.size(); ++d) spec.center[d] = xs[d];
        spec.center_absolute = true;
    } else if (field == "width") {
        spec.width = parse_double_value(qualified, value);
        spec.width_absolute = true;
    } else if (field == "modes") {
        const auto xs = parse_int_list(qualified, value);
        if (xs.size() > 3) throw config_error("'" + qualified + "' takes at most 3 modes");
        for (std::size_t d = 0; d < xs.size(); ++d) spec.modes[d] = xs[d];
    } else {
        throw config_error("unknown key '" + qualified + "'");
    }
}

/// Dispatch one (section, key, value) triple into the config. Shared by the
/// file parser and by command-line overrides, so both reject unknown keys
/// the same way.
inline void set_config_key(RunConfig& cfg, const std::string& section, const std::string& key,
                           const std::string& value) {
    const std::string qualified = section.empty() ? key : section + "." + key;
    if (section == "grid") {
        if (key == "dims") cfg.dims = parse_int_list(qualified, value);
        else if (key == "extent") cfg.extent = parse_double_list(qualified, value);
        else throw config_error("unknown key '" + qualified + "'");
        return;
    }
    if (section == "scenario") {
        if (key == "preset") {
            const ScenarioPreset p = scenario_preset(value);
            cfg.preset = p.name;
            cfg.u0 = p.u0;
            cfg.v0 = p.v0;
            return;
        }
        const auto dot = key.find('.');
        if (dot != std::string::npos) {
            const std::string head = key.substr(0, dot);
            const std::string field = key.substr(dot + 1);
            if (head == "u0") return set_initial_key(cfg.u0, qualified, field, value);
            if (head == "v0") return set_initial_key(cfg.v0, qualified, field, value);
        }
        throw config_error("unknown key '" + qualified + "'");
    }
    if (section == "scheme") {
        if (key == "k") cfg.scheme.k = parse_double_value(qualified, value);
        else if (key == "m") cfg.scheme.m = parse_double_value(qualified, value);
        else if (key == "alpha") {
            cfg.scheme.alpha = parse_double_value(qualified, value);
            cfg.alpha_auto = false;
        } else if (key == "s") cfg.scheme.s = parse_double_value(qualified, value);
        else if (key == "flux") {
            if (value == "central") cfg.scheme.flux_spec.scheme = FaceScheme::central;
            else if (value == "upwind") cfg.scheme.flux_spec.scheme = FaceScheme::upwind;
            else throw config_error("value of '" + qualified + "' must be central or upwind");
        } else if (key == "picard_tol") cfg.scheme.picard_tol = parse_double_value(qualified, value);
        else if (key == "picard_maxit") cfg.scheme.picard_maxit = parse_int_value(qualified, value);
        else if (key == "step_halving_max") cfg.scheme.step_halving_max = parse_int_value(qualified, value);
        else if (key == "bound_tol") cfg.scheme.bound_tol = parse_double_value(qualified, value);
        else if (key == "damping") cfg.scheme.damping = parse_double_value(qualified, value);
        else if (key == "linear_tol") cfg.scheme.linear_tol = parse_double_value(qualified, value);
        else if (key == "linear_maxit") cfg.scheme.linear_maxit = parse_int_value(qualified, value);
        else throw config_error("unknown key '" + qualified + "'");
        return;
    }
    if (section == "run") {
        if (key == "T_final") cfg.T_final = parse_double_value(qualified, value);
        else if (key == "v_variant") {
            if (value == "from_z") cfg.v_variant = VVariant::from_z;
            else if (value == "from_u") cfg.v_variant = VVariant::from_u;
            else throw config_error("value of '" + qualified + "' must be from_z or from_u");
        } else if (key == "record_v_gap") cfg.record_v_gap = parse_bool_value(qualified, value);
        else if (key == "cadence") cfg.cadence = parse_int_value(qualified, value);
        else if (key == "output_csv") cfg.output_csv = value;
        else if (key == "snapshot_every") cfg.snapshot_every = parse_int_value(qualified, value);
        else if (key == "snapshot_prefix") cfg.snapshot_prefix = value;
        else if (key == "energy_lambda") cfg.energy_lambda = parse_double_value(qualified, value);
        else throw config_error("unknown key '" + qualified + "'");
        return;
    }
    throw config_error("unknown key '" + qualified + "'");
}

inline bool is_section_name(const std::string& s) {
    return s == "grid" || s == "scenario" || s == "scheme" || s == "run";
}

/// Config keys are unique across sections, so bare override keys can be
/// routed to their section.
inline std::string section_for_key(const std::string& key) {
    if (key == "dims" || key == "extent") return "grid";
    if (key == "preset" || key.rfind("u0.", 0) == 0 || key.rfind("v0.", 0) == 0)
        return "scenario";
    if (key == "k" || key == "m" || key == "alpha" || key == "s" || key == "flux" ||
        key == "picard_tol" || key == "picard_maxit" || key == "step_halving_max" ||
        key == "bound_tol" || key == "damping" || key == "linear_tol" || key == "linear_maxit")
        return "scheme";
    if (key == "T_final" || key == "v_variant" || key == "record_v_gap" || key == "cadence" ||
        key == "output_csv" || key == "snapshot_every" || key == "snapshot_prefix" ||
        key == "energy_lambda")
        return "run";
    throw config_error("unknown key '" + key + "'");
}

inline void validate_config(const RunConfig& cfg) {
    if (cfg.dims.empty()) throw config_error("missing required key 'grid.dims'");
    if (cfg.extent.empty()) throw config_error("missing required key 'grid.extent'");
    if (cfg.dims.size() != cfg.extent.size())
        throw config_error("'grid.dims' and 'grid.extent' must have the same number of axes");
    if (cfg.dims.size() > 3) throw config_error("'grid.dims' takes 1 to 3 axes");
    for (int d : cfg.dims)
        if (d < 1) throw config_error("'grid.dims' entries must be >= 1");
    for (double e : cfg.extent)
        if (!(e > 0.0)) throw config_error("'grid.extent' entries must be positive");
    if (!(cfg.scheme.k > 0.0)) throw config_error("'k' must be positive");
    if (!(cfg.scheme.m > 0.0)) throw config_error("'m' must be positive");
    if (!cfg.alpha_auto && !(cfg.scheme.alpha > 0.0)) throw config_error("'alpha' must be positive");
    if (!(cfg.scheme.s >= 1.0)) throw config_error("'s' must be >= 1");
    if (!(cfg.scheme.picard_tol > 0.0)) throw config_error("'picard_tol' must be positive");
    if (!(cfg.scheme.bound_tol > 0.0)) throw config_error("'bound_tol' must be positive");
    if (!(cfg.scheme.damping > 0.0 && cfg.scheme.damping <= 1.0))
        throw config_error("'damping' must lie in (0, 1]");
    if (!(cfg.T_final > 0.0)) throw config_error("'T_final' must be positive");
    if (cfg.cadence < 1) throw config_error("'cadence' must be >= 1");
    if (cfg.snapshot_every < 0) throw config_error("'snapshot_every' must be >= 0");
    if (!(cfg.energy_lambda > 0.0)) throw config_error("'energy_lambda' must be positive");
    const double ratio = cfg.T_final / cfg.scheme.k;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
        throw config_error("'T_final' must be a whole number of steps of 'k'");
}

} // namespace detail

/// Parse the line-based `key = value` format with bracketed section headers.
/// Unknown keys are rejected, parse errors carry the line number, and
/// validation errors name the offending field. Overrides are applied after
/// the text, as "section.key" / value pairs.
inline RunConfig parse_config(const std::string& text,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
    RunConfig cfg;
    detail::ConfigCursor cur;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++cur.line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;
        try {
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw config_error("malformed section header");
                cur.section = detail::trim(line.substr(1, line.size() - 2));
                if (cur.section.empty()) throw config_error("empty section header");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw config_error("expected 'key = value'");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty()) throw config_error("empty key");
            detail::set_config_key(cfg, cur.section, key, value);
        } catch (const config_error& e) {
            throw config_error("config parse error at line " + std::to_string(cur.line) + ": " + e.what());
        }
    }
    for (const auto& [qualified, value] : overrides) {
        const auto dot = qualified.find('.');
        if (dot != std::string::npos && detail::is_section_name(qualified.substr(0, dot))) {
            detail::set_config_key(cfg, qualified.substr(0, dot), qualified.substr(dot + 1), value);
        } else {
            detail::set_config_key(cfg, detail::section_for_key(qualified), qualified, value);
        }
    }
    detail::validate_config(cfg);
    return cfg;
}

/// The documented default for the lower truncation level when the config
/// leaves alpha unset.
inline double default_alpha(const Field& v0) {
    return 1e-2 * std::max(1.0, std::sqrt(linf_norm(v0)));
}

} // namespace ccsim
