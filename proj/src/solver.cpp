#include "semifrac/solver.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "semifrac/gauss.hpp"

namespace semifrac {

namespace {

constexpr double kPi = std::numbers::pi;

Mesh make_mesh(const Domain& domain, double h) {
    if (!(h > 0.0)) throw std::domain_error("mesh size h must be positive");
    const int n = static_cast<int>(std::llround(domain.length / h));
    if (n < 1 || std::abs(n * h - domain.length) > 1e-9 * domain.length)
        throw std::domain_error("mesh size h must divide the domain length");
    return domain.kind == Domain::Kind::Interval ? Mesh::interval(n, domain.length)
                                                 : Mesh::unit_square(n);
}

void check_theta_policy(RegularityMode mode, double theta, bool allow_override) {
    const bool needs_second_order = mode == RegularityMode::MixedFirstCell ||
                                    mode == RegularityMode::PiecewiseLinear;
    if (needs_second_order && theta != 0.5 && !allow_override)
        throw std::invalid_argument(
            "linear-interpolant branches need theta = 1/2 "
            "(set override_theta_policy to force)");
}

double domain_measure(const Domain& d) {
    return d.kind == Domain::Kind::Interval ? d.length : 1.0;
}

}  // namespace

double oracle_lambda_min(const Domain& domain, const BoundaryCondition& bc) {
    if (domain.kind == Domain::Kind::UnitSquare) return 2.0 * kPi * kPi;
    if (bc.kind == BcKind::Robin)
        return interval_eigenpairs(domain.length, bc, 1).lambda_min();
    const double mu = kPi / domain.length;  // first positive mode for both
    return mu * mu;
}

SolveResult solve_homogeneous(const FractionalProblem& problem,
                              const DiscretizationParams& params) {
    const auto t_start = std::chrono::steady_clock::now();
    if (!(params.a > 0.0 && params.a <= 2.0))
        throw std::domain_error("step coupling a must lie in (0, 2]");

    const Mesh mesh = make_mesh(problem.domain, params.h);
    auto space = std::make_shared<FeSpace>(mesh, params.k, problem.bc);
    auto [M, A] = assemble(*space);

    const double dt = std::pow(params.h, params.a);
    const double lambda_min = oracle_lambda_min(problem.domain, problem.bc);
    const auto [T, n_t] = choose_truncation(problem.s, problem.r, dt,
                                            lambda_min, params.safety);
    QuadratureSpec spec(problem.s, problem.r, dt, T);
    check_theta_policy(spec.mode, params.theta, params.override_theta_policy);
    const WeightVector weights = compute_weights(spec);

    Eigen::VectorXd w0 = l2_project(problem.f, *space, M);
    if (problem.bc.kind == BcKind::Neumann) {
        // Projection preserves the integral, so the discrete mean is the
        // continuous one; remove it to keep the datum in the solvable range.
        const double mean =
            spmv(M, w0).sum() / domain_measure(problem.domain);
        w0.array() -= mean;
    }

    HeatState state(*space, M, A, params.theta, dt, std::move(w0));
    Eigen::VectorXd acc = weights.beta[0] * state.w();
    for (int j = 1; j <= spec.n_t; ++j) {
        theta_step(state);
        if (weights.beta[j] != 0.0) acc += weights.beta[j] * state.w();
    }
    acc /= weights.gamma_s;

    SolveResult result{space->to_nodal(acc), space, spec, state.step_index(), 0.0,
                       state.solver_iterations()};
    result.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
    return result;
}

SpectralFunction solve_spectral_quadrature(const FractionalProblem& problem,
                                           double dt, double safety, int n_modes) {
    std::shared_ptr<const EigenBasis> basis;
    SpectralFunction fhat;
    if (problem.f_spectral) {
        fhat = *problem.f_spectral;
        basis = fhat.basis;
    } else {
        basis = std::make_shared<EigenBasis>(
            problem.domain.kind == Domain::Kind::Interval
                ? interval_eigenpairs(problem.domain.length, problem.bc, n_modes)
                : square_eigenpairs(n_modes));
        fhat = project(problem.f, basis);
    }

    const auto [T, n_t] = choose_truncation(problem.s, problem.r, dt,
                                            basis->lambda_min(), safety);
    QuadratureSpec spec(problem.s, problem.r, dt, T);
    const WeightVector weights = compute_weights(spec);

    // Per mode the semigroup samples form a geometric sequence; accumulate
    // the weighted sum with running powers of exp(-lambda dt).
    SpectralFunction u = fhat;
    for (int m = 0; m < basis->count(); ++m) {
        const double q = std::exp(-basis->lambdas[m] * spec.dt);
        double power = 1.0;
        double acc = weights.beta[0];
        for (int j = 1; j <= spec.n_t; ++j) {
            power *= q;
            acc += weights.beta[j] * power;
        }
        u.coeffs[m] = fhat.coeffs[m] * acc / weights.gamma_s;
    }
    return u;
}

Eigen::VectorXd lift_boundary(const BoundaryData& g, const FeSpace& space) {
    const Mesh& mesh = space.mesh;
    const int n_nodes = space.n_nodes;

    // Boundary trace evaluated at a boundary node.
    auto trace = [&](int node) -> double {
        if (mesh.dimension == 1)
            return space.node_x(node) == 0.0 ? g.left : g.right;
        const double x = space.node_x(node), y = space.node_y(node);
        // Corners take the edge that parameterizes them first; continuous
        // data make the choice immaterial.
        if (y == 0.0 && g.edges[0]) return g.edges[0](x);
        if (x == 1.0 && g.edges[1]) return g.edges[1](y);
        if (y == 1.0 && g.edges[2]) return g.edges[2](x);
        if (x == 0.0 && g.edges[3]) return g.edges[3](y);
        return 0.0;
    };

    if (space.bc.kind == BcKind::Dirichlet) {
        // Strong elimination: solve the interior harmonic extension.
        const FeSpace full(mesh, space.k, BoundaryCondition::neumann());
        auto [Mf, Af] = assemble(full);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n_nodes);
        for (int node = 0; node < n_nodes; ++node)
            if (space.is_boundary_node(node)) z[node] = trace(node);
        Eigen::VectorXd rhs_full = -spmv(Af, z);
        Eigen::VectorXd rhs(space.n_active);
        for (int a = 0; a < space.n_active; ++a)
            rhs[a] = rhs_full[space.node_of_active[a]];

        auto [Mi, Ai] = assemble(space);  // interior stiffness, SPD
        CgConfig cfg;
        cfg.precond = mesh.dimension == 2 ? Preconditioner::Jacobi
                                          : Preconditioner::None;
        const Eigen::VectorXd zi = cg_solve(Ai, rhs, cfg).x;
        for (int a = 0; a < space.n_active; ++a)
            z[space.node_of_active[a]] += zi[a];
        return z;
    }

    // Flux / Robin data enter as boundary loads against the traces.
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_nodes);
    double total_flux = 0.0, norm_g = 0.0;
    if (mesh.dimension == 1) {
        b[0] = g.left;
        b[n_nodes - 1] = g.right;
        total_flux = g.left + g.right;
        norm_g = std::hypot(g.left, g.right);
    } else {
        const GaussRule rule = gauss_legendre(4);
        const int n = mesh.n, stride = n + 1;
        auto accumulate_edge = [&](int n0, int n1, const std::function<double(double)>& ge,
                                   double coord0) {
            if (!ge) return;
            for (int q = 0; q < 4; ++q) {
                const double t = 0.5 * (rule.nodes[q] + 1.0);
                const double w = 0.5 * rule.weights[q] * mesh.h;
                const double val = ge(coord0 + t * mesh.h);
                b[n0] += w * val * (1.0 - t);
                b[n1] += w * val * t;
                total_flux += w * val;
                norm_g += w * val * val;
            }
        };
        for (int i = 0; i < n; ++i) {
            accumulate_edge(i, i + 1, g.edges[0], i * mesh.h);
            accumulate_edge(i * stride + n, (i + 1) * stride + n, g.edges[1], i * mesh.h);
            accumulate_edge(n * stride + i, n * stride + i + 1, g.edges[2], i * mesh.h);
            accumulate_edge(i * stride, (i + 1) * stride, g.edges[3], i * mesh.h);
        }
        norm_g = std::sqrt(norm_g);
    }

    auto [M, A] = assemble(space);  // all nodes active here
    CgConfig cfg;
    cfg.precond = mesh.dimension == 2 ? Preconditioner::Jacobi : Preconditioner::None;

    if (space.bc.kind == BcKind::Neumann) {
        if (std::abs(total_flux) > 1e-10 * std::max(norm_g, 1e-300))
            throw std::domain_error(
                "lift_boundary: Neumann datum violates zero-total-flux compatibility");
        if (norm_g == 0.0) return Eigen::VectorXd::Zero(n_nodes);
        // Kill the roundoff kernel component, solve, then return the
        // mean-zero representative.
        b.array() -= b.sum() / n_nodes;
        Eigen::VectorXd z = cg_solve(A, b, cfg).x;
        const double mean = spmv(M, z).sum() / domain_measure(
                                Domain{mesh.dimension == 1 ? Domain::Kind::Interval
                                                           : Domain::Kind::UnitSquare,
                                       mesh.length});
        z.array() -= mean;
        return z;
    }

    // Robin: SPD system, constants are not in the kernel.
    return cg_solve(A, b, cfg).x;
}

SolveResult solve_nonhomogeneous(const FractionalProblem& problem,
                                 const DiscretizationParams& params) {
    SolveResult result = solve_homogeneous(problem, params);
    const BoundaryData g = problem.g.value_or(BoundaryData{});
    result.U += lift_boundary(g, *result.space);
    return result;
}

double estimate_lambda_min(const CsrMatrix& M, const CsrMatrix& A,
                           bool deflate_constants) {
    const int n = static_cast<int>(A.rows());
    std::mt19937 rng(0x5eed0002u);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = unif(rng);

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd M1 = spmv(M, ones);
    const double m11 = ones.dot(M1);
    auto deflate = [&](Eigen::VectorXd& v) {
        if (deflate_constants) v -= (M1.dot(v) / m11) * ones;
    };
    deflate(x);
    x /= x.norm();

    CgConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.precond = Preconditioner::Jacobi;

    double lambda = 0.0;
    double prev = -1.0;
    for (int it = 0; it < 300; ++it) {
        Eigen::VectorXd rhs = spmv(M, x);
        if (deflate_constants) rhs.array() -= rhs.sum() / n;  // range(A) component
        Eigen::VectorXd y = cg_solve(A, rhs, cfg, x).x;
        deflate(y);
        y /= y.norm();
        lambda = y.dot(spmv(A, y)) / y.dot(spmv(M, y));
        x = y;
        if (prev > 0.0 && std::abs(lambda - prev) <= 1e-7 * lambda) return lambda;
        prev = lambda;
    }
    return 0.5 * lambda;  // stagnation: conservative fallback
}

}  // namespace semifrac
