// Command-line front end: single solves, convergence studies, the truncation
// cost report, and the built-in property checks.
#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "semifrac/experiments.hpp"

using namespace semifrac;

namespace {

BoundaryCondition parse_bc(const std::string& name, double kappa) {
    if (name == "dirichlet") return BoundaryCondition::dirichlet();
    if (name == "neumann") return BoundaryCondition::neumann();
    if (name == "robin") return BoundaryCondition::robin(kappa);
    throw CLI::ValidationError("--bc", "expected dirichlet, neumann or robin");
}

void print_table(const ConvergenceTable& table) {
    std::printf("%-24s %5s %5s %9s %11s %8s %13s %8s %9s\n", "case", "s", "r",
                "h", "dt", "N_T", "error_l2", "slope", "wall_ms");
    for (const ConvergenceRow& r : table.rows)
        std::printf("%-24s %5.2f %5.2f %9.3g %11.4g %8d %13.5e %8.3f %9.1f\n",
                    r.case_label.c_str(), r.s, r.r, r.h, r.dt, r.n_t, r.error_l2,
                    r.slope, r.wall_ms);
}

int cmd_solve(const std::string& case_str, double s, double r, double h, double a,
              int k, double theta, const std::string& bc_str, double kappa,
              const std::string& out) {
    const CaseId id = case_from_name(case_str);

    FractionalProblem prob;
    prob.s = s;
    prob.r = r;
    prob.domain = id == CaseId::Checkerboard2d ? Domain::unit_square()
                                               : Domain::interval(1.0);
    prob.bc = parse_bc(bc_str, kappa);

    ScalarField exact;  // empty when no closed form is available
    switch (id) {
        case CaseId::Eig1d:
        case CaseId::Eig1dAopt:
            prob.f = first_eigen_datum(s);
            exact = [](double x, double) { return std::sqrt(2.0) * std::sin(std::numbers::pi * x); };
            break;
        case CaseId::Nonhomog1d:
            prob.f = first_eigen_datum(s);
            prob.g = BoundaryData{1.0, 2.0, {}};
            exact = [](double x, double) {
                return std::sqrt(2.0) * std::sin(std::numbers::pi * x) + 1.0 + x;
            };
            break;
        case CaseId::Singular1d:
            prob.f = singular_field();
            break;
        case CaseId::Step1dBcs:
            prob.f = step_field();
            break;
        case CaseId::Checkerboard2d:
            prob.f = checkerboard_field();
            break;
        case CaseId::QuadOnly:
            throw CLI::ValidationError("--case", "quad_only has no single-solve form; use study");
    }

    DiscretizationParams params;
    params.h = h;
    params.a = a == 0.0 ? 2.0 / (1.0 + s) : a;
    params.k = k;
    params.theta = theta;
    const SolveResult res = prob.g ? solve_nonhomogeneous(prob, params)
                                   : solve_homogeneous(prob, params);

    std::printf("case=%s s=%g r=%g bc=%s h=%g dt=%g\n", case_str.c_str(), s, r,
                bc_name(prob.bc.kind), h, res.quad.dt);
    std::printf("N_T=%d steps=%d cg_iterations=%ld wall_ms=%.1f\n", res.quad.n_t,
                res.n_steps, res.cg_iterations, res.wall_ms);
    if (exact)
        std::printf("error_l2=%.6e\n", l2_error(res.U, exact, *res.space));

    if (!out.empty()) {
        std::ofstream os(out);
        if (!os) throw CLI::FileError::Missing(out);
        const FeSpace& sp = *res.space;
        if (sp.mesh.dimension == 1) {
            os << "x,u\n";
            for (int node = 0; node < sp.n_nodes; ++node) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", sp.node_x(node),
                              res.U[node]);
                os << buf;
            }
        } else {
            os << "x,y,u\n";
            for (int node = 0; node < sp.n_nodes; ++node) {
                char buf[192];
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", sp.node_x(node),
                              sp.node_y(node), res.U[node]);
                os << buf;
            }
        }
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fractional elliptic solver: semigroup quadrature over a FE "
                 "or spectral heat solver"};
    app.require_subcommand(1);

    // solve: one problem at one resolution
    std::string case_str = "eig1d", bc_str = "dirichlet", out;
    double s = 0.5, r = 1.5, h = 1.0 / 16.0, a = 2.0, theta = 0.5, kappa = 1.0;
    int k = 1;
    CLI::App* solve = app.add_subcommand("solve", "run a single solve");
    solve->set_help_flag("--help", "print help");  // frees -h for the mesh size
    solve->add_option("--case", case_str, "datum: eig1d, singular1d, step1d_bcs, "
                                          "checkerboard2d, nonhomog1d");
    solve->add_option("--s", s, "fractional power in (0,1)")->check(CLI::Range(1e-6, 1.0));
    solve->add_option("--r", r, "data regularity index");
    solve->add_option("--h", h, "mesh size");
    solve->add_option("--a", a, "step coupling dt = h^a; 0 selects 2/(1+s)");
    solve->add_option("--k", k, "FE order (1 or 2; 2 is 1D only)");
    solve->add_option("--theta", theta, "time scheme parameter");
    solve->add_option("--bc", bc_str, "dirichlet, neumann or robin");
    solve->add_option("--kappa", kappa, "Robin coefficient");
    solve->add_option("--out", out, "write the nodal solution as CSV");

    // study: a convergence table from a config file or per-case defaults
    std::string config_path, study_case, study_out;
    CLI::App* study = app.add_subcommand("study", "run a convergence study");
    study->add_option("config", config_path, "key = value config file");
    study->add_option("--case", study_case, "run the named case with defaults");
    study->add_option("--out", study_out, "CSV output path (overrides config)");

    CLI::App* cost = app.add_subcommand("cost-report",
                                        "truncation node counts vs the reference table");

    CLI::App* selftest = app.add_subcommand("selftest", "built-in property checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return cmd_solve(case_str, s, r, h, a, k, theta, bc_str, kappa, out);

        if (study->parsed()) {
            RunConfig config;
            if (!config_path.empty())
                config = RunConfig::from_file(config_path);
            else if (!study_case.empty())
                config = RunConfig::defaults_for(case_from_name(study_case));
            else
                throw CLI::ValidationError("study", "need a config file or --case");
            if (!study_out.empty()) config.out = study_out;
            const ConvergenceTable table = run_case(config);
            print_table(table);
            if (!config.out.empty()) std::printf("wrote %s\n", config.out.c_str());
            return 0;
        }

        if (cost->parsed()) {
            const CostTable table = cost_report();
            std::printf("%5s %9s %6s %8s %8s %7s %s\n", "s", "h", "a", "N_T", "ref",
                        "ratio", "ok");
            for (const CostRow& row : table.rows)
                std::printf("%5.2f %9.4g %6.3f %8d %8d %7.3f %s\n", row.s, row.h,
                            row.a, row.n_t, row.n_t_reference, row.ratio,
                            row.within_factor_two ? "yes" : "NO");
            std::printf(table.all_ok ? "all node counts within a factor of two\n"
                                     : "node counts out of range\n");
            return table.all_ok ? 0 : 1;
        }

        if (selftest->parsed()) {
            bool all = true;
            for (const CheckResult& c : run_selftests()) {
                std::printf("[%s] %-26s %s\n", c.pass ? "ok" : "FAIL", c.name.c_str(),
                            c.detail.c_str());
                all = all && c.pass;
            }
            // Smoke datum: default truncation for the first-eigenfunction case.
            const double h0 = 1.0 / 16.0;
            const auto [T, n_t] = choose_truncation(0.5, 1.5, h0 * h0,
                                                    std::numbers::pi * std::numbers::pi);
            std::printf("eig1d defaults at h=1/16: T=%.6f N_T=%d\n", T, n_t);
            return all ? 0 : 1;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
