#include "semifrac/experiments.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "semifrac/gamma.hpp"

namespace semifrac {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> dyadic(int from_exp, int to_exp) {
    std::vector<double> out;
    for (int e = from_exp; e <= to_exp; ++e) out.push_back(std::pow(2.0, -e));
    return out;
}

void validate_h_list(const std::vector<double>& h) {
    if (h.size() < 4)
        throw std::invalid_argument("run_case: need at least 4 mesh sizes");
    for (size_t i = 1; i < h.size(); ++i)
        if (!(h[i] < h[i - 1]))
            throw std::invalid_argument("run_case: h list must be strictly decreasing");
}

void fit_and_stamp(std::vector<ConvergenceRow>& rows, size_t begin) {
    std::vector<double> hs, es;
    for (size_t i = begin; i < rows.size(); ++i) {
        hs.push_back(rows[i].h);
        es.push_back(rows[i].error_l2);
    }
    const SlopeFit fit = fit_slope(hs, es);
    for (size_t i = begin; i < rows.size(); ++i) rows[i].slope = fit.slope;
}

ConvergenceRow base_row(const std::string& label, double s, const RunConfig& c,
                        double a_eff, double h) {
    ConvergenceRow row;
    row.case_label = label;
    row.s = s;
    row.r = c.r;
    row.k = c.k;
    row.theta = c.theta;
    row.a = a_eff;
    row.h = h;
    row.dt = std::pow(h, a_eff);
    return row;
}

}  // namespace

const char* case_name(CaseId id) {
    switch (id) {
        case CaseId::Eig1d: return "eig1d";
        case CaseId::Eig1dAopt: return "eig1d_aopt";
        case CaseId::Singular1d: return "singular1d";
        case CaseId::Checkerboard2d: return "checkerboard2d";
        case CaseId::Step1dBcs: return "step1d_bcs";
        case CaseId::Nonhomog1d: return "nonhomog1d";
        case CaseId::QuadOnly: return "quad_only";
    }
    return "?";
}

CaseId case_from_name(const std::string& name) {
    for (CaseId id : {CaseId::Eig1d, CaseId::Eig1dAopt, CaseId::Singular1d,
                      CaseId::Checkerboard2d, CaseId::Step1dBcs, CaseId::Nonhomog1d,
                      CaseId::QuadOnly})
        if (name == case_name(id)) return id;
    throw std::invalid_argument("unknown case: " + name);
}

RunConfig RunConfig::defaults_for(CaseId id) {
    RunConfig c;
    c.case_id = id;
    switch (id) {
        case CaseId::Eig1d:
            c.s = {0.1, 0.5, 0.9};
            c.r = 1.5;
            c.h = dyadic(3, 9);
            break;
        case CaseId::Eig1dAopt:
            c.s = {0.1, 0.5, 0.9};
            c.r = 2.0;
            c.a = 0.0;  // per-s optimal coupling
            c.h = dyadic(3, 9);
            break;
        case CaseId::Singular1d:
            c.s = {0.25, 0.5, 0.75};
            c.r = 0.0;
            c.theta = 1.0;
            c.a = 1.0;
            c.h = dyadic(3, 10);
            c.ref_h = std::pow(2.0, -13);
            break;
        case CaseId::Checkerboard2d:
            c.s = {0.1, 0.3, 0.5, 0.8, 0.9};
            c.r = 0.45;
            c.h = dyadic(3, 6);
            c.ref_modes = 320;
            break;
        case CaseId::Step1dBcs:
            c.s = {0.3};
            c.r = 0.45;
            c.h = dyadic(3, 9);
            c.ref_modes = 4096;
            break;
        case CaseId::Nonhomog1d:
            c.s = {0.1, 0.5, 0.9};
            c.r = 1.5;
            c.h = dyadic(3, 9);
            break;
        case CaseId::QuadOnly:
            c.s = {0.1, 0.5, 0.9};
            c.r = 1.5;
            c.h = dyadic(3, 9);
            break;
    }
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);

    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    auto trim = [](std::string v) {
        const auto b = v.find_first_not_of(" \t\r");
        const auto e = v.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }

    CaseId id = CaseId::Eig1d;
    bool have_case = false;
    for (const auto& [key, value] : pairs)
        if (key == "case") {
            id = case_from_name(value);
            have_case = true;
        }
    if (!have_case) throw std::invalid_argument("config: missing 'case' key");

    RunConfig c = defaults_for(id);
    auto parse_list = [](const std::string& v) {
        std::vector<double> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
        return out;
    };
    for (const auto& [key, value] : pairs) {
        if (key == "case") continue;
        if (key == "s") c.s = parse_list(value);
        else if (key == "r") c.r = std::stod(value);
        else if (key == "k") c.k = std::stoi(value);
        else if (key == "theta") c.theta = std::stod(value);
        else if (key == "a") c.a = std::stod(value);
        else if (key == "h") c.h = parse_list(value);
        else if (key == "out") c.out = value;
        else if (key == "ref_modes") c.ref_modes = std::stoi(value);
        else if (key == "ref_h") c.ref_h = std::stod(value);
        else if (key == "kappa") c.kappa = std::stod(value);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return c;
}

SlopeFit fit_slope(const std::vector<double>& h, const std::vector<double>& error) {
    if (h.size() != error.size() || h.size() < 2)
        throw std::invalid_argument("fit_slope: need at least 2 matched points");
    for (size_t i = 0; i < h.size(); ++i)
        if (!(h[i] > 0.0) || !(error[i] > 0.0))
            throw std::domain_error("fit_slope: values must be positive");
    const size_t m = std::min<size_t>(4, h.size());
    const size_t off = h.size() - m;

    double sx = 0, sy = 0;
    std::vector<double> xs(m), ys(m);
    for (size_t i = 0; i < m; ++i) {
        xs[i] = std::log(h[off + i]);
        ys[i] = std::log(error[off + i]);
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    double rss = 0;
    for (size_t i = 0; i < m; ++i) {
        const double pred = my + fit.slope * (xs[i] - mx);
        rss += (ys[i] - pred) * (ys[i] - pred);
    }
    fit.residual = std::sqrt(rss / m);
    return fit;
}

ScalarField checkerboard_field() {
    return [](double x, double y) {
        return ((x < 0.5) == (y < 0.5)) ? 1.0 : -1.0;
    };
}

ScalarField step_field() {
    return [](double x, double) { return x < 0.5 ? 1.0 : -1.0; };
}

ScalarField singular_field(double eps) {
    return [eps](double x, double) { return std::pow(x, -0.5 + eps); };
}

ScalarField first_eigen_datum(double s) {
    const double scale = std::pow(kPi * kPi, s) * std::sqrt(2.0);
    return [scale](double x, double) { return scale * std::sin(kPi * x); };
}

namespace {

// Coefficient of sgn(t - 1/2) against sqrt(2) sin(m pi t) on (0, 1):
// nonzero only for m = 2p with odd p.
double half_sign_sine_coeff(int m) {
    if (m % 2 != 0) return 0.0;
    const int p = m / 2;
    if (p % 2 == 0) return 0.0;
    return -2.0 * std::sqrt(2.0) / (p * kPi);
}

}  // namespace

SpectralFunction checkerboard_coefficients(std::shared_ptr<const EigenBasis> basis) {
    if (!basis || basis->domain.kind != Domain::Kind::UnitSquare)
        throw std::invalid_argument("checkerboard_coefficients: need a square basis");
    SpectralFunction f;
    f.basis = basis;
    f.coeffs.resize(basis->count());
    for (int i = 0; i < basis->count(); ++i) {
        const auto [m, n] = basis->modes2d[i];
        f.coeffs[i] = half_sign_sine_coeff(m) * half_sign_sine_coeff(n);
    }
    return f;
}

SpectralFunction step_coefficients(std::shared_ptr<const EigenBasis> basis) {
    if (!basis || basis->domain.kind != Domain::Kind::Interval ||
        basis->domain.length != 1.0)
        throw std::invalid_argument("step_coefficients: need a unit-interval basis");
    SpectralFunction f;
    f.basis = basis;
    f.coeffs.resize(basis->count());

    for (int i = 0; i < basis->count(); ++i) {
        const int m = i + 1;
        switch (basis->bc.kind) {
            case BcKind::Dirichlet:
                // sgn(1/2 - x) against sqrt(2) sin(m pi x)
                f.coeffs[i] = -half_sign_sine_coeff(m);
                break;
            case BcKind::Neumann: {
                // 2 sqrt(2) sin(m pi / 2) / (m pi); the datum is mean-free
                f.coeffs[i] =
                    2.0 * std::sqrt(2.0) * std::sin(m * kPi / 2.0) / (m * kPi);
                break;
            }
            case BcKind::Robin: {
                // Antiderivative of the Robin mode is closed-form.
                const double mu = basis->mu[i], kap = basis->bc.kappa;
                auto F = [&](double x) {
                    return std::sin(mu * x) / mu - kap / (mu * mu) * std::cos(mu * x);
                };
                f.coeffs[i] = basis->norm_c[i] * (2.0 * F(0.5) - F(0.0) - F(1.0));
                break;
            }
        }
    }
    return f;
}

ConvergenceTable run_case(const RunConfig& config) {
    validate_h_list(config.h);
    ConvergenceTable table;
    auto& rows = table.rows;

    switch (config.case_id) {
        case CaseId::Eig1d:
        case CaseId::Eig1dAopt:
        case CaseId::Nonhomog1d: {
            const bool nonhomog = config.case_id == CaseId::Nonhomog1d;
            for (double s : config.s) {
                const double a_eff = config.a == 0.0 ? 2.0 / (1.0 + s) : config.a;
                const size_t begin = rows.size();
                ScalarField exact =
                    nonhomog ? ScalarField([](double x, double) {
                                   return std::sqrt(2.0) * std::sin(kPi * x) + 1.0 + x;
                               })
                             : ScalarField([](double x, double) {
                                   return std::sqrt(2.0) * std::sin(kPi * x);
                               });
                for (double h : config.h) {
                    FractionalProblem prob;
                    prob.domain = Domain::interval(1.0);
                    prob.bc = BoundaryCondition::dirichlet();
                    prob.s = s;
                    prob.r = config.r;
                    prob.f = first_eigen_datum(s);
                    if (nonhomog) prob.g = BoundaryData{1.0, 2.0, {}};
                    DiscretizationParams p{h, a_eff, config.k, config.theta, 1.01, false};
                    const SolveResult res =
                        nonhomog ? solve_nonhomogeneous(prob, p) : solve_homogeneous(prob, p);
                    ConvergenceRow row = base_row(case_name(config.case_id), s, config, a_eff, h);
                    row.dt = res.quad.dt;
                    row.n_t = res.quad.n_t;
                    row.error_l2 = l2_error(res.U, exact, *res.space);
                    row.wall_ms = res.wall_ms;
                    rows.push_back(std::move(row));
                }
                fit_and_stamp(rows, begin);
            }
            break;
        }

        case CaseId::Singular1d: {
            if (!(config.ref_h > 0.0))
                throw std::invalid_argument("singular1d: ref_h must be set");
            for (double s : config.s) {
                FractionalProblem prob;
                prob.domain = Domain::interval(1.0);
                prob.bc = BoundaryCondition::dirichlet();
                prob.s = s;
                prob.r = config.r;
                prob.f = singular_field();

                DiscretizationParams pref{config.ref_h, config.a, config.k,
                                          config.theta, 1.01, false};
                const SolveResult ref = solve_homogeneous(prob, pref);

                const size_t begin = rows.size();
                for (double h : config.h) {
                    DiscretizationParams p{h, config.a, config.k, config.theta, 1.01, false};
                    const SolveResult res = solve_homogeneous(prob, p);
                    auto coarse = [space = res.space, U = res.U](double x, double) {
                        return fe_eval(*space, U, x);
                    };
                    ConvergenceRow row = base_row(case_name(config.case_id), s, config,
                                                  config.a, h);
                    row.dt = res.quad.dt;
                    row.n_t = res.quad.n_t;
                    row.error_l2 = l2_error(ref.U, coarse, *ref.space);
                    row.wall_ms = res.wall_ms;
                    rows.push_back(std::move(row));
                }
                fit_and_stamp(rows, begin);
            }
            break;
        }

        case CaseId::Checkerboard2d: {
            auto basis = std::make_shared<EigenBasis>(square_eigenpairs(config.ref_modes));
            const SpectralFunction fhat = checkerboard_coefficients(basis);
            for (double s : config.s) {
                const ScalarField exact = to_field(frac_power_apply(fhat, -s));
                const size_t begin = rows.size();
                for (double h : config.h) {
                    FractionalProblem prob;
                    prob.domain = Domain::unit_square();
                    prob.bc = BoundaryCondition::dirichlet();
                    prob.s = s;
                    prob.r = config.r;
                    prob.f = checkerboard_field();
                    DiscretizationParams p{h, config.a, config.k, config.theta, 1.01, false};
                    const SolveResult res = solve_homogeneous(prob, p);
                    ConvergenceRow row = base_row(case_name(config.case_id), s, config,
                                                  config.a, h);
                    row.dt = res.quad.dt;
                    row.n_t = res.quad.n_t;
                    row.error_l2 = l2_error(res.U, exact, *res.space);
                    row.wall_ms = res.wall_ms;
                    rows.push_back(std::move(row));
                }
                fit_and_stamp(rows, begin);
            }
            break;
        }

        case CaseId::Step1dBcs: {
            const BoundaryCondition bcs[3] = {BoundaryCondition::dirichlet(),
                                              BoundaryCondition::neumann(),
                                              BoundaryCondition::robin(config.kappa)};
            for (const BoundaryCondition& bc : bcs) {
                auto basis = std::make_shared<EigenBasis>(
                    interval_eigenpairs(1.0, bc, config.ref_modes));
                const SpectralFunction fhat = step_coefficients(basis);
                const std::string label =
                    std::string(case_name(config.case_id)) + ":" + bc_name(bc.kind);
                for (double s : config.s) {
                    const ScalarField exact = to_field(frac_power_apply(fhat, -s));
                    const size_t begin = rows.size();
                    for (double h : config.h) {
                        FractionalProblem prob;
                        prob.domain = Domain::interval(1.0);
                        prob.bc = bc;
                        prob.s = s;
                        prob.r = config.r;
                        prob.f = step_field();
                        DiscretizationParams p{h, config.a, config.k, config.theta,
                                               1.01, false};
                        const SolveResult res = solve_homogeneous(prob, p);
                        ConvergenceRow row = base_row(label, s, config, config.a, h);
                        row.dt = res.quad.dt;
                        row.n_t = res.quad.n_t;
                        row.error_l2 = l2_error(res.U, exact, *res.space);
                        row.wall_ms = res.wall_ms;
                        rows.push_back(std::move(row));
                    }
                    fit_and_stamp(rows, begin);
                }
            }
            break;
        }

        case CaseId::QuadOnly: {
            for (double s : config.s) {
                auto basis = std::make_shared<EigenBasis>(
                    interval_eigenpairs(1.0, BoundaryCondition::dirichlet(), 1));
                SpectralFunction fs;
                fs.basis = basis;
                fs.coeffs = Eigen::VectorXd::Constant(1, std::pow(basis->lambdas[0], s));

                FractionalProblem prob;
                prob.domain = Domain::interval(1.0);
                prob.bc = BoundaryCondition::dirichlet();
                prob.s = s;
                prob.r = config.r;
                prob.f_spectral = fs;

                const size_t begin = rows.size();
                for (double h : config.h) {
                    const double dt = std::pow(h, config.a);
                    const auto t0 = std::chrono::steady_clock::now();
                    const SpectralFunction u = solve_spectral_quadrature(prob, dt, 1.01, 1);
                    const double ms = std::chrono::duration<double, std::milli>(
                                          std::chrono::steady_clock::now() - t0)
                                          .count();
                    ConvergenceRow row = base_row(case_name(config.case_id), s, config,
                                                  config.a, h);
                    const auto [T, n_t] = choose_truncation(s, config.r, dt,
                                                            basis->lambdas[0], 1.01);
                    (void)T;
                    row.n_t = n_t;
                    // Exact coefficient is lambda_1^{-s} * lambda_1^{s} = 1.
                    row.error_l2 = std::abs(u.coeffs[0] - 1.0);
                    row.wall_ms = ms;
                    rows.push_back(std::move(row));
                }
                fit_and_stamp(rows, begin);
            }
            break;
        }
    }

    if (!config.out.empty()) emit_csv(table, config.out);
    return table;
}

CostTable cost_report() {
    // Published reference node counts for r = 2, k = 1, lambda_min = pi^2;
    // columns s = 0.1, 0.5, 0.9, one block per coupling.
    struct RefRow {
        double h;
        int a2[3];
        int aopt[3];
    };
    static const RefRow ref[] = {
        {0.1, {38, 51, 66}, {23, 7, 3}},
        {0.05, {200, 279, 369}, {105, 23, 10}},
        {0.025, {1012, 1432, 1899}, {465, 75, 26}},
        {0.0125, {4921, 7011, 9290}, {1991, 233, 67}},
        {0.00625, {23248, 33217, 43945}, {8293, 702, 167}},
        {0.003125, {107462, 153684, 202959}, {33809, 2058, 407}},
    };
    static const double svals[3] = {0.1, 0.5, 0.9};

    CostTable table;
    for (const RefRow& row : ref)
        for (int j = 0; j < 3; ++j)
            for (int which = 0; which < 2; ++which) {
                const double s = svals[j];
                const double a = which == 0 ? 2.0 : 2.0 / (1.0 + s);
                const double dt = std::pow(row.h, a);
                const auto [T, n_t] =
                    choose_truncation(s, 2.0, dt, kPi * kPi, 1.01);
                (void)T;
                CostRow out;
                out.s = s;
                out.h = row.h;
                out.a = a;
                out.n_t = n_t;
                out.n_t_reference = which == 0 ? row.a2[j] : row.aopt[j];
                out.ratio = double(out.n_t) / out.n_t_reference;
                out.within_factor_two = out.ratio >= 0.5 && out.ratio <= 2.0;
                table.all_ok = table.all_ok && out.within_factor_two;
                table.rows.push_back(out);
            }
    return table;
}

void emit_csv(const ConvergenceTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
    out << "case,s,r,k,theta,a,h,dt,N_T,error_l2,slope,wall_ms\n";
    char buf[512];
    for (const ConvergenceRow& r : table.rows) {
        std::snprintf(buf, sizeof buf,
                      "%s,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n",
                      r.case_label.c_str(), r.s, r.r, r.k, r.theta, r.a, r.h, r.dt,
                      r.n_t, r.error_l2, r.slope, r.wall_ms);
        out << buf;
    }
}

ConvergenceTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    ConvergenceTable table;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_csv: empty file");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string item;
        std::vector<std::string> f;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() != 12) throw std::runtime_error("read_csv: malformed row");
        ConvergenceRow r;
        r.case_label = f[0];
        r.s = std::stod(f[1]);
        r.r = std::stod(f[2]);
        r.k = std::stoi(f[3]);
        r.theta = std::stod(f[4]);
        r.a = std::stod(f[5]);
        r.h = std::stod(f[6]);
        r.dt = std::stod(f[7]);
        r.n_t = std::stoi(f[8]);
        r.error_l2 = std::stod(f[9]);
        r.slope = std::stod(f[10]);
        r.wall_ms = std::stod(f[11]);
        table.rows.push_back(std::move(r));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Self-contained property checks.

namespace {

// Exact integral of the interpolant against t^{s-1}, reconstructed cell by
// cell from interior samples of interpolant_eval; independent of the weight
// formulas.
double interpolant_integral(RegularityMode mode, const Eigen::VectorXd& samples,
                            double dt, double s) {
    const int n = static_cast<int>(samples.size()) - 1;
    const double g = 0.5 / std::sqrt(3.0);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double t0 = j * dt, t1 = (j + 1) * dt;
        const double ta = t0 + dt * (0.5 - g), tb = t0 + dt * (0.5 + g);
        const double va = interpolant_eval(mode, samples, dt, ta);
        const double vb = interpolant_eval(mode, samples, dt, tb);
        const double alpha = (vb - va) / (tb - ta);
        const double beta = va - alpha * ta;
        acc += alpha * (std::pow(t1, s + 1.0) - std::pow(t0, s + 1.0)) / (s + 1.0) +
               beta * (std::pow(t1, s) - std::pow(t0, s)) / s;
    }
    return acc;
}

QuadratureSpec random_spec(std::mt19937& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double s = 0.05 + 0.9 * unif(rng);
    const double r = -2.0 * s + 0.02 + (4.0 - 0.04) * unif(rng);
    const double dt = 0.01 + 0.49 * unif(rng);
    const double T = dt * (1.0 + 40.0 * unif(rng));
    return QuadratureSpec(s, r, dt, T);
}

CheckResult check_weight_nonnegativity() {
    std::mt19937 rng(111);
    double min_beta = 1e300;
    for (int draw = 0; draw < 10000; ++draw) {
        const QuadratureSpec spec = random_spec(rng);
        const WeightVector w = compute_weights(spec);
        min_beta = std::min(min_beta, w.beta.minCoeff());
        if (w.beta.minCoeff() < 0.0)
            return {"weight-nonnegativity", false,
                    "negative weight at draw " + std::to_string(draw)};
    }
    return {"weight-nonnegativity", true,
            "10000 random specs, min weight " + std::to_string(min_beta)};
}

CheckResult check_weight_sum_identity() {
    std::mt19937 rng(222);
    double worst = 0.0;
    for (int draw = 0; draw < 10000; ++draw) {
        const QuadratureSpec spec = random_spec(rng);
        const WeightVector w = compute_weights(spec);
        // The exact mass of the interpolated measure: T^s/s, except in the
        // negative-order branch where the first cell is dropped by design.
        double target = std::pow(spec.T, spec.s) / spec.s;
        if (spec.mode == RegularityMode::NegativeOrder)
            target -= std::pow(spec.dt, spec.s) / spec.s;
        const double rel = std::abs(w.beta.sum() - target) / target;
        worst = std::max(worst, rel);
        if (rel > 1e-12)
            return {"weight-sum-identity", false,
                    "relative defect " + std::to_string(rel)};
    }
    return {"weight-sum-identity", true,
            "10000 random specs, worst relative defect " + std::to_string(worst)};
}

CheckResult check_interpolant_equivalence() {
    std::mt19937 rng(333);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (int draw = 0; draw < 300; ++draw) {
        const QuadratureSpec spec = random_spec(rng);
        const WeightVector w = compute_weights(spec);
        const double lambda = 0.2 + 30.0 * unif(rng);
        Eigen::VectorXd samples(spec.n_t + 1);
        for (int j = 0; j <= spec.n_t; ++j)
            samples[j] = std::exp(-lambda * j * spec.dt);
        const double via_weights = apply_quadrature(w, samples);
        const double via_integral =
            interpolant_integral(spec.mode, samples, spec.dt, spec.s) / w.gamma_s;
        const double rel =
            std::abs(via_weights - via_integral) / std::max(1e-300, std::abs(via_integral));
        worst = std::max(worst, rel);
        if (rel > 1e-6)
            return {"interpolant-equivalence", false,
                    "relative gap " + std::to_string(rel)};
    }
    return {"interpolant-equivalence", true,
            "300 draws, worst relative gap " + std::to_string(worst)};
}

CheckResult check_gamma_identity() {
    // Q applied to exp(-lambda t) must reproduce lambda^{-s} once dt and the
    // horizon are pushed far enough.
    double worst = 0.0;
    for (const double lambda : {1.0, kPi * kPi}) {
        const double dt = lambda > 2.0 ? 1.25e-4 : 5e-4;
        const double T = lambda > 2.0 ? 2.0 : 16.0;
        for (const double s : {0.3, 0.5, 0.8}) {
            const QuadratureSpec spec(s, 2.0, dt, T);
            const WeightVector w = compute_weights(spec);
            const double q = std::exp(-lambda * spec.dt);
            double power = 1.0, acc = w.beta[0];
            for (int j = 1; j <= spec.n_t; ++j) {
                power *= q;
                acc += w.beta[j] * power;
            }
            const double got = acc / w.gamma_s;
            const double want = std::pow(lambda, -s);
            const double rel = std::abs(got - want) / want;
            worst = std::max(worst, rel);
            if (rel > 1e-6)
                return {"gamma-identity", false,
                        "lambda=" + std::to_string(lambda) + " s=" + std::to_string(s) +
                            " relative error " + std::to_string(rel)};
        }
    }
    return {"gamma-identity", true, "worst relative error " + std::to_string(worst)};
}

CheckResult check_semigroup_composition() {
    auto basis = std::make_shared<EigenBasis>(
        interval_eigenpairs(1.0, BoundaryCondition::dirichlet(), 32));
    std::mt19937 rng(444);
    std::normal_distribution<double> normal;
    SpectralFunction u;
    u.basis = basis;
    u.coeffs.resize(basis->count());
    for (int i = 0; i < basis->count(); ++i) u.coeffs[i] = normal(rng);
    const double nu = u.coeffs.norm();

    double worst = 0.0;
    for (const auto& [t, tau] : {std::pair{0.037, 0.211}, std::pair{0.004, 0.09}}) {
        const SpectralFunction two = semigroup_apply(semigroup_apply(u, tau), t);
        const SpectralFunction one = semigroup_apply(u, t + tau);
        const double gap = (two.coeffs - one.coeffs).norm() / nu;
        worst = std::max(worst, gap);
        if (gap > 1e-12)
            return {"semigroup-composition", false, "gap " + std::to_string(gap)};
    }
    return {"semigroup-composition", true,
            "worst composition gap " + std::to_string(worst)};
}

CheckResult check_theta_order() {
    const Mesh mesh = Mesh::interval(32);
    const FeSpace space(mesh, 1, BoundaryCondition::dirichlet());
    auto [M, A] = assemble(space);

    // Exact reference: first eigenvector of the discrete pencil, evolved by
    // the exact exponential of its eigenvalue.
    const Eigen::MatrixXd Ad = Eigen::MatrixXd(A), Md = Eigen::MatrixXd(M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Ad, Md);
    const Eigen::VectorXd v1 = ges.eigenvectors().col(0);
    const double lam1 = ges.eigenvalues()[0];
    const double t_end = 0.25;

    for (const double theta : {0.5, 1.0}) {
        std::vector<double> hs, es;
        for (const int steps : {8, 16, 32, 64}) {
            const double dt = t_end / steps;
            HeatState state(space, M, A, theta, dt, v1);
            for (int j = 0; j < steps; ++j) theta_step(state);
            const Eigen::VectorXd diff = state.w() - std::exp(-lam1 * t_end) * v1;
            es.push_back(std::sqrt(diff.dot(spmv(M, diff))));
            hs.push_back(dt);
        }
        const double slope = fit_slope(hs, es).slope;
        const double want = theta == 0.5 ? 2.0 : 1.0;
        if (std::abs(slope - want) > 0.1)
            return {"theta-scheme-order", false,
                    "theta=" + std::to_string(theta) + " slope " + std::to_string(slope)};
    }
    return {"theta-scheme-order", true, "orders 2 and 1 confirmed"};
}

CheckResult check_cg_residual() {
    std::mt19937 rng(555);
    std::normal_distribution<double> normal;
    const int n = 100;
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = normal(rng);
    Eigen::MatrixXd S = B.transpose() * B + 10.0 * Eigen::MatrixXd::Identity(n, n);
    CsrMatrix A(n, n);
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t.emplace_back(i, j, S(i, j));
    A.setFromTriplets(t.begin(), t.end());

    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = normal(rng);
    for (const Preconditioner p : {Preconditioner::None, Preconditioner::Jacobi}) {
        CgConfig cfg;
        cfg.precond = p;
        const CgResult res = cg_solve(A, b, cfg);
        const double true_res = (b - spmv(A, res.x)).norm() / b.norm();
        if (true_res > 1e-10)
            return {"cg-residual", false, "residual " + std::to_string(true_res)};
    }
    return {"cg-residual", true, "relative residuals below 1e-10"};
}

}  // namespace

std::vector<CheckResult> run_selftests() {
    return {
        check_weight_nonnegativity(),
        check_weight_sum_identity(),
        check_interpolant_equivalence(),
        check_gamma_identity(),
        check_semigroup_composition(),
        check_theta_order(),
        check_cg_residual(),
    };
}

}  // namespace semifrac
