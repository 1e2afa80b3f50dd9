// Command-line front end: run simulations, cross-check the scalar oracle,
// drive refinement studies and re-run the uniform-estimate checks on emitted CSVs.
//
// Exit codes: 0 ok, 2 invariant breach, 3 solver failure, 4 config error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccsim/config.hpp"
#include "ccsim/io.hpp"
#include "ccsim/scalar_oracle.hpp"
#include "ccsim/simulation.hpp"
#include "ccsim/study.hpp"

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ccsim::config_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::pair<std::string, std::string>> collect_overrides(const std::vector<std::string>& extras) {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& tok = extras[i];
        if (tok.rfind("--", 0) != 0)
            throw ccsim::config_error("unexpected argument '" + tok + "' (overrides are --key value or --section.key value)");
        if (i + 1 >= extras.size())
            throw ccsim::config_error("override '" + tok + "' is missing a value");
        overrides.emplace_back(tok.substr(2), extras[i + 1]);
        ++i;
    }
    return overrides;
}

std::string fmt(double v) { return ccsim::detail::format_double(v); }

void print_estimates_report(const ccsim::UniformEstimatesReport& rep) {
    std::printf("[%s] mass conservation: worst relative drift %s (<= 1e-9)\n",
                rep.mass_ok ? "PASS" : "FAIL", fmt(rep.worst_mass_drift).c_str());
    std::printf("[%s] z L2 decay: worst relative excess %s (<= 1e-6)\n",
                rep.l2_ok ? "PASS" : "FAIL", fmt(rep.worst_l2_excess).c_str());
    std::printf("[%s] gradient budget: %s <= %s\n", rep.grad_ok ? "PASS" : "FAIL",
                fmt(rep.grad_lhs).c_str(), fmt(rep.grad_rhs).c_str());
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& extras) {
    const auto cfg = ccsim::parse_config(read_text_file(config_path), collect_overrides(extras));
    ccsim::RunOptions opts;
    if (cfg.snapshot_every > 0) {
        opts.on_state = [&cfg](const ccsim::State& st) {
            if (st.n % cfg.snapshot_every != 0) return;
            char suffix[32];
            std::snprintf(suffix, sizeof suffix, "_%06d.dat", st.n);
            ccsim::write_snapshot(cfg.snapshot_prefix + "_u" + suffix, st.u, st.t);
            ccsim::write_snapshot(cfg.snapshot_prefix + "_z" + suffix, st.z, st.t);
            if (st.v) ccsim::write_snapshot(cfg.snapshot_prefix + "_v" + suffix, *st.v, st.t);
        };
    }
    const ccsim::RunResult res = ccsim::run_simulation(cfg, opts);

    ccsim::write_diagnostics_csv(cfg.output_csv, ccsim::cadence_filter(res.history, cfg.cadence));
    ccsim::RunMeta meta;
    meta.scheme = res.scheme;
    meta.mass_u0 = res.mass_u0;
    meta.z0_l2_sq = res.z0_l2_sq;
    meta.v0_alpha2_l2_sq = res.v0_alpha2_l2_sq;
    meta.z0_linf = res.z0_linf;
    meta.v0_linf = res.v0_linf;
    ccsim::write_run_meta(cfg.output_csv + ".meta.json", meta);

    std::printf("completed %d steps on a %d-cell grid (alpha=%s, halvings=%d)\n",
                static_cast<int>(res.history.size()) - 1, res.grid.cell_count(),
                fmt(res.scheme.alpha).c_str(), res.total_halvings);
    print_estimates_report(res.estimates);
    const auto& em = res.energy_report;
    std::printf("[%s] energy monitor: max E %s vs envelope %s%s\n",
                em.within_envelope() ? "PASS" : "WARN", fmt(em.max_e).c_str(),
                fmt(em.envelope).c_str(),
                em.excursions > 0
                    ? (" (" + std::to_string(em.excursions) + " excursions, first at step " +
                       std::to_string(em.first_excursion) + ")")
                          .c_str()
                    : "");
    std::printf("diagnostics written to %s\n", cfg.output_csv.c_str());
    return res.exit_code;
}

int cmd_oracle_check(const std::string& config_path, const std::vector<std::string>& extras,
                     double tol, const std::string& out_path) {
    const auto cfg = ccsim::parse_config(read_text_file(config_path), collect_overrides(extras));
    if (cfg.u0.kind != ccsim::InitialDataSpec::Kind::constant ||
        cfg.v0.kind != ccsim::InitialDataSpec::Kind::constant)
        throw ccsim::config_error("oracle-check requires a constant scenario (u0 and v0)");

    ccsim::Grid g = ccsim::build_grid(cfg.dims, cfg.extent);
    ccsim::Field u0 = ccsim::sample_initial(g, cfg.u0, "u0");
    ccsim::Field v0 = ccsim::sample_initial(g, cfg.v0, "v0");
    ccsim::SchemeParams p = cfg.scheme;
    if (cfg.alpha_auto) p.alpha = ccsim::default_alpha(v0);

    const int steps = cfg.step_count();
    const auto oracle = ccsim::run_scalar(cfg.u0.value, cfg.v0.value, p.alpha, p.s, p.m, p.k, steps);

    ccsim::State cur;
    cur.u = u0;
    cur.z = v0;
    for (double& z : cur.z.values) z = std::sqrt(z + p.alpha * p.alpha);
    ccsim::Field v_u = v0;

    std::ofstream csv(out_path);
    if (!csv) throw ccsim::error("cannot open '" + out_path + "'");
    csv << "n,t,u_oracle,z_oracle,v_from_z_oracle,v_from_u_oracle,du,dz,dv_from_z,dv_from_u\n";

    auto field_dev = [](const ccsim::Field& f, double ref) {
        double worst = 0.0;
        for (double v : f.values) worst = std::max(worst, std::abs(v - ref));
        return worst;
    };

    double worst = 0.0;
    csv << 0 << ",0," << fmt(oracle.u[0]) << ',' << fmt(oracle.z[0]) << ','
        << fmt(oracle.v_from_z[0]) << ',' << fmt(oracle.v_from_u[0]) << ','
        << fmt(field_dev(cur.u, oracle.u[0])) << ',' << fmt(field_dev(cur.z, oracle.z[0]))
        << ",0,0\n";
    for (int n = 1; n <= steps; ++n) {
        const auto sr = ccsim::solve_step(cur, p);
        cur = sr.state;
        const ccsim::Field v_z = ccsim::v_from_z(cur.z, p.alpha, p.bound_tol);
        v_u = ccsim::v_from_u(v_u, cur.u, p);
        const std::size_t i = static_cast<std::size_t>(n);
        const double du = field_dev(cur.u, oracle.u[i]);
        const double dz = field_dev(cur.z, oracle.z[i]);
        const double dvz = field_dev(v_z, oracle.v_from_z[i]);
        const double dvu = field_dev(v_u, oracle.v_from_u[i]);
        worst = std::max({worst, du, dz, dvz, dvu});
        csv << n << ',' << fmt(cur.t) << ',' << fmt(oracle.u[i]) << ',' << fmt(oracle.z[i]) << ','
            << fmt(oracle.v_from_z[i]) << ',' << fmt(oracle.v_from_u[i]) << ',' << fmt(du) << ','
            << fmt(dz) << ',' << fmt(dvz) << ',' << fmt(dvu) << '\n';
    }
    std::printf("[%s] field solver vs scalar recursion over %d steps: worst deviation %s (tol %s)\n",
                worst <= tol ? "PASS" : "FAIL", steps, fmt(worst).c_str(), fmt(tol).c_str());
    std::printf("per-step table written to %s\n", out_path.c_str());
    return worst <= tol ? 0 : 2;
}

void print_table(const ccsim::StudyTable& t, std::ostream& csv) {
    std::printf("%s:\n", t.name.c_str());
    std::printf("  %-5s %-12s %-12s %-12s %-12s %-8s %-8s %-12s %-12s\n", "level", "k", "m",
                "diff_u", "diff_z", "ord_u", "ord_z", "v_gap", "exact_err");
    for (const auto& r : t.rows) {
        std::printf("  %-5d %-12.5g %-12.5g %-12.5g %-12.5g %-8.3g %-8.3g %-12.5g %-12.5g\n",
                    r.level, r.k, r.m, r.diff_u, r.diff_z, r.order_u, r.order_z, r.v_gap,
                    r.exact_err);
        csv << t.name << ',' << r.level << ',' << fmt(r.k) << ',' << fmt(r.m) << ','
            << fmt(r.diff_u) << ',' << fmt(r.diff_z) << ',' << fmt(r.order_u) << ','
            << fmt(r.order_z) << ',' << fmt(r.v_gap) << ',' << fmt(r.exact_err) << '\n';
    }
}

int cmd_study(const std::string& config_path, const std::vector<std::string>& extras,
              int k_levels, int m_levels, int jobs, const std::string& out_path) {
    const auto cfg = ccsim::parse_config(read_text_file(config_path), collect_overrides(extras));
    const auto study = ccsim::convergence_study(cfg, k_levels, m_levels, jobs);
    std::ofstream csv(out_path);
    if (!csv) throw ccsim::error("cannot open '" + out_path + "'");
    csv << "table,level,k,m,diff_u,diff_z,order_u,order_z,v_gap,exact_err\n";
    print_table(study.k_table, csv);
    print_table(study.m_table, csv);
    print_table(study.joint_table, csv);
    std::printf("rate table written to %s\n", out_path.c_str());
    if (!study.complete) {
        std::printf("[FAIL] study incomplete: %s\n", study.failure.c_str());
        return 3;
    }
    return 0;
}

int cmd_check(const std::string& csv_path, std::string meta_path) {
    if (meta_path.empty()) meta_path = csv_path + ".meta.json";
    const auto rows = ccsim::read_diagnostics_csv(csv_path);
    const auto meta = ccsim::read_run_meta(meta_path);
    const auto rep = ccsim::check_uniform_estimates_from_norms(rows, meta.scheme, meta.z0_l2_sq,
                                                     meta.v0_alpha2_l2_sq, meta.mass_u0);
    print_estimates_report(rep);
    return rep.passed() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chemotaxis-consumption time-discrete scheme runner"};
    app.require_subcommand(1);

    std::string config_path, csv_path, meta_path, out_path;
    double oracle_tol = 1e-10;
    int k_levels = 3, m_levels = 2, jobs = 1;

    auto* run = app.add_subcommand("run", "integrate a scenario and emit diagnostics");
    run->add_option("config", config_path, "config file")->required();
    run->allow_extras();

    auto* oracle = app.add_subcommand("oracle-check",
                                      "compare the field solver against the scalar recursion");
    oracle->add_option("config", config_path, "config file (constant scenario)")->required();
    oracle->add_option("--tol", oracle_tol, "acceptance tolerance");
    oracle->add_option("--out", out_path, "per-step CSV path");
    oracle->allow_extras();

    auto* study = app.add_subcommand("convergence-study", "joint (m,k) refinement study");
    study->add_option("config", config_path, "config file")->required();
    study->add_option("--k-levels", k_levels, "number of k halvings")->required();
    study->add_option("--m-levels", m_levels, "number of m doublings")->required();
    study->add_option("--jobs", jobs, "max concurrent runs");
    study->add_option("--out", out_path, "rate table CSV path");
    study->allow_extras();

    auto* check = app.add_subcommand("check", "re-run the uniform-estimate checks on an emitted CSV");
    check->add_option("csv", csv_path, "diagnostics CSV")->required();
    check->add_option("--meta", meta_path, "metadata sidecar (default: <csv>.meta.json)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, run->remaining());
        if (oracle->parsed())
            return cmd_oracle_check(config_path, oracle->remaining(), oracle_tol,
                                    out_path.empty() ? "oracle_check.csv" : out_path);
        if (study->parsed())
            return cmd_study(config_path, study->remaining(), k_levels, m_levels, jobs,
                             out_path.empty() ? "convergence_study.csv" : out_path);
        if (check->parsed()) return cmd_check(csv_path, meta_path);
    } catch (const ccsim::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 4;
    } catch (const ccsim::solver_failure_error& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 3;
    } catch (const ccsim::picard_divergence_error& e) {
        std::fprintf(stderr, "step failure: %s\n", e.what());
        if (!e.residuals.empty()) {
            std::fprintf(stderr, "residual trace (last attempt):");
            const std::size_t from = e.residuals.size() > 8 ? e.residuals.size() - 8 : 0;
            for (std::size_t i = from; i < e.residuals.size(); ++i)
                std::fprintf(stderr, " %g", e.residuals[i]);
            std::fprintf(stderr, "\n");
        }
        return 3;
    } catch (const ccsim::bound_violation_error& e) {
        std::fprintf(stderr, "invariant breach: %s\n", e.what());
        return 2;
    } catch (const ccsim::error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
