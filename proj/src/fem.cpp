#include "semifrac/fem.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "semifrac/gauss.hpp"

namespace semifrac {

namespace {

// 1D reference shapes on [0, 1].
void shape_1d(int k, double xi, double* N, double* dN) {
    if (k == 1) {
        N[0] = 1.0 - xi;
        N[1] = xi;
        dN[0] = -1.0;
        dN[1] = 1.0;
    } else {
        N[0] = (1.0 - xi) * (1.0 - 2.0 * xi);
        N[1] = 4.0 * xi * (1.0 - xi);
        N[2] = xi * (2.0 * xi - 1.0);
        dN[0] = 4.0 * xi - 3.0;
        dN[1] = 4.0 - 8.0 * xi;
        dN[2] = 4.0 * xi - 1.0;
    }
}

struct Tri {
    int v[3];  // global node ids
};

// Two triangles per grid square, diagonal from lower-left to upper-right.
std::vector<Tri> square_triangles(const Mesh& mesh) {
    const int n = mesh.n;
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<Tri> tris;
    tris.reserve(2 * n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            tris.push_back({{id(i, j), id(i + 1, j), id(i + 1, j + 1)}});
            tris.push_back({{id(i, j), id(i + 1, j + 1), id(i, j + 1)}});
        }
    return tris;
}

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(const FeSpace& space, const std::vector<int>& nodes,
             const Eigen::MatrixXd& local, Triplets& out) {
    const int m = static_cast<int>(nodes.size());
    for (int a = 0; a < m; ++a) {
        const int ia = space.active_of_node[nodes[a]];
        if (ia < 0) continue;
        for (int b = 0; b < m; ++b) {
            const int ib = space.active_of_node[nodes[b]];
            if (ib < 0) continue;
            out.emplace_back(ia, ib, local(a, b));
        }
    }
}

std::mt19937 seeded_rng() { return std::mt19937(0x5eed0001u); }

}  // namespace

Mesh Mesh::interval(int n_cells, double L) {
    if (n_cells < 1) throw std::domain_error("Mesh: need >= 1 cell");
    if (!(L > 0.0)) throw std::domain_error("Mesh: length must be positive");
    return {1, n_cells, L / n_cells, L};
}

Mesh Mesh::unit_square(int n_cells_per_axis) {
    if (n_cells_per_axis < 1) throw std::domain_error("Mesh: need >= 1 cell");
    return {2, n_cells_per_axis, 1.0 / n_cells_per_axis, 1.0};
}

FeSpace::FeSpace(const Mesh& m, int order, BoundaryCondition bcond)
    : mesh(m), k(order), bc(bcond) {
    if (mesh.dimension == 1) {
        if (k != 1 && k != 2) throw std::domain_error("FeSpace: 1D order must be 1 or 2");
        n_nodes = k * mesh.n + 1;
    } else {
        if (k != 1) throw std::domain_error("FeSpace: 2D supports order 1 only");
        n_nodes = (mesh.n + 1) * (mesh.n + 1);
    }

    active_of_node.assign(n_nodes, -1);
    const bool strong = (bc.kind == BcKind::Dirichlet);
    for (int node = 0; node < n_nodes; ++node) {
        if (strong && is_boundary_node(node)) continue;
        active_of_node[node] = static_cast<int>(node_of_active.size());
        node_of_active.push_back(node);
    }
    n_active = static_cast<int>(node_of_active.size());
}

double FeSpace::node_x(int node) const {
    if (mesh.dimension == 1) return node * mesh.h / k;
    return (node % (mesh.n + 1)) * mesh.h;
}

double FeSpace::node_y(int node) const {
    if (mesh.dimension == 1) return 0.0;
    return (node / (mesh.n + 1)) * mesh.h;
}

bool FeSpace::is_boundary_node(int node) const {
    if (mesh.dimension == 1) return node == 0 || node == n_nodes - 1;
    const int stride = mesh.n + 1;
    const int i = node % stride, j = node / stride;
    return i == 0 || j == 0 || i == mesh.n || j == mesh.n;
}

Eigen::VectorXd FeSpace::to_nodal(const Eigen::Ref<const Eigen::VectorXd>& active) const {
    if (active.size() != n_active)
        throw std::invalid_argument("to_nodal: active vector length mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_nodes);
    for (int a = 0; a < n_active; ++a) out[node_of_active[a]] = active[a];
    return out;
}

std::pair<CsrMatrix, CsrMatrix> assemble(const FeSpace& space) {
    Triplets tm, ta;
    const Mesh& mesh = space.mesh;

    if (mesh.dimension == 1) {
        const int k = space.k;
        const int nen = k + 1;
        const GaussRule rule = gauss_legendre(k + 2);
        Eigen::MatrixXd Me = Eigen::MatrixXd::Zero(nen, nen);
        Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(nen, nen);
        double N[3], dN[3];
        for (int q = 0; q < rule.nodes.size(); ++q) {
            const double xi = 0.5 * (rule.nodes[q] + 1.0);
            const double w = 0.5 * rule.weights[q];
            shape_1d(k, xi, N, dN);
            for (int a = 0; a < nen; ++a)
                for (int b = 0; b < nen; ++b) {
                    Me(a, b) += w * N[a] * N[b] * mesh.h;
                    Ke(a, b) += w * dN[a] * dN[b] / mesh.h;
                }
        }
        std::vector<int> nodes(nen);
        for (int e = 0; e < mesh.n; ++e) {
            for (int a = 0; a < nen; ++a) nodes[a] = k * e + a;
            scatter(space, nodes, Me, tm);
            scatter(space, nodes, Ke, ta);
        }
        if (space.bc.kind == BcKind::Robin) {
            // Boundary "mass" in 1D is a point evaluation at each endpoint.
            for (int node : {0, space.n_nodes - 1}) {
                const int ia = space.active_of_node[node];
                ta.emplace_back(ia, ia, space.bc.kappa);
            }
        }
    } else {
        // P1 element matrices are exact in closed form.
        for (const Tri& tri : square_triangles(mesh)) {
            double px[3], py[3];
            for (int a = 0; a < 3; ++a) {
                px[a] = space.node_x(tri.v[a]);
                py[a] = space.node_y(tri.v[a]);
            }
            const double det = (px[1] - px[0]) * (py[2] - py[0]) -
                               (px[2] - px[0]) * (py[1] - py[0]);
            const double area = 0.5 * std::abs(det);
            Eigen::MatrixXd Ke(3, 3), Me(3, 3);
            double bg[3], cg[3];
            for (int a = 0; a < 3; ++a) {
                const int a1 = (a + 1) % 3, a2 = (a + 2) % 3;
                bg[a] = py[a1] - py[a2];
                cg[a] = px[a2] - px[a1];
            }
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    Ke(a, b) = (bg[a] * bg[b] + cg[a] * cg[b]) / (4.0 * area);
                    Me(a, b) = area / 12.0 * (a == b ? 2.0 : 1.0);
                }
            std::vector<int> nodes(tri.v, tri.v + 3);
            scatter(space, nodes, Me, tm);
            scatter(space, nodes, Ke, ta);
        }
        if (space.bc.kind == BcKind::Robin) {
            // kappa * edge mass on each boundary segment of length h.
            const int n = mesh.n, stride = n + 1;
            auto add_edge = [&](int n0, int n1) {
                const double c = space.bc.kappa * mesh.h / 6.0;
                const int i0 = space.active_of_node[n0], i1 = space.active_of_node[n1];
                ta.emplace_back(i0, i0, 2.0 * c);
                ta.emplace_back(i1, i1, 2.0 * c);
                ta.emplace_back(i0, i1, c);
                ta.emplace_back(i1, i0, c);
            };
            for (int i = 0; i < n; ++i) {
                add_edge(i, i + 1);                                  // bottom
                add_edge(n * stride + i, n * stride + i + 1);        // top
                add_edge(i * stride, (i + 1) * stride);              // left
                add_edge(i * stride + n, (i + 1) * stride + n);     // right
            }
        }
    }

    CsrMatrix M(space.n_active, space.n_active), A(space.n_active, space.n_active);
    M.setFromTriplets(tm.begin(), tm.end());
    A.setFromTriplets(ta.begin(), ta.end());
    M.makeCompressed();
    A.makeCompressed();
    return {std::move(M), std::move(A)};
}

CsrMatrix assemble_lumped_mass(const FeSpace& space) {
    auto [M, A] = assemble(space);
    (void)A;
    Triplets t;
    for (int i = 0; i < space.n_active; ++i) {
        double row = 0.0;
        for (CsrMatrix::InnerIterator it(M, i); it; ++it) row += it.value();
        t.emplace_back(i, i, row);
    }
    CsrMatrix L(space.n_active, space.n_active);
    L.setFromTriplets(t.begin(), t.end());
    L.makeCompressed();
    return L;
}

namespace {

Eigen::VectorXd assemble_load(const ScalarField& f, const FeSpace& space) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(space.n_active);
    const Mesh& mesh = space.mesh;
    if (mesh.dimension == 1) {
        const int k = space.k;
        const int nen = k + 1;
        const GaussRule rule = gauss_legendre(k + 2);
        double N[3], dN[3];
        for (int e = 0; e < mesh.n; ++e) {
            const double x0 = e * mesh.h;
            for (int q = 0; q < rule.nodes.size(); ++q) {
                const double xi = 0.5 * (rule.nodes[q] + 1.0);
                const double w = 0.5 * rule.weights[q] * mesh.h;
                shape_1d(k, xi, N, dN);
                const double fx = f(x0 + xi * mesh.h, 0.0);
                for (int a = 0; a < nen; ++a) {
                    const int ia = space.active_of_node[k * e + a];
                    if (ia >= 0) b[ia] += w * fx * N[a];
                }
            }
        }
    } else {
        const TriangleRule& rule = triangle_rule_deg4();
        for (const Tri& tri : square_triangles(mesh)) {
            double px[3], py[3];
            for (int a = 0; a < 3; ++a) {
                px[a] = space.node_x(tri.v[a]);
                py[a] = space.node_y(tri.v[a]);
            }
            const double det = (px[1] - px[0]) * (py[2] - py[0]) -
                               (px[2] - px[0]) * (py[1] - py[0]);
            const double area = 0.5 * std::abs(det);
            for (int q = 0; q < 6; ++q) {
                double x = 0.0, y = 0.0;
                for (int a = 0; a < 3; ++a) {
                    x += rule.bary(q, a) * px[a];
                    y += rule.bary(q, a) * py[a];
                }
                const double w = rule.weights[q] * area * f(x, y);
                for (int a = 0; a < 3; ++a) {
                    const int ia = space.active_of_node[tri.v[a]];
                    if (ia >= 0) b[ia] += w * rule.bary(q, a);
                }
            }
        }
    }
    return b;
}

CgConfig default_cg(const FeSpace& space) {
    CgConfig cfg;
    cfg.precond = space.mesh.dimension == 2 ? Preconditioner::Jacobi
                                            : Preconditioner::None;
    return cfg;
}

}  // namespace

Eigen::VectorXd l2_project(const ScalarField& f, const FeSpace& space,
                           const CsrMatrix& M) {
    const Eigen::VectorXd b = assemble_load(f, space);
    return cg_solve(M, b, default_cg(space)).x;
}

Eigen::VectorXd l2_project(const ScalarField& f, const FeSpace& space) {
    auto [M, A] = assemble(space);
    (void)A;
    return l2_project(f, space, M);
}

CflReport cfl_check(double theta, double dt, const CsrMatrix& M, const CsrMatrix& A) {
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::domain_error("cfl_check: theta must lie in [0, 1]");
    if (!(dt > 0.0)) throw std::domain_error("cfl_check: dt must be positive");

    CflReport report;
    if (theta >= 0.5) {
        report.dt_limit = std::numeric_limits<double>::infinity();
        return report;
    }

    // Generalized power iteration for lambda_max(M^{-1} A).
    const int n = static_cast<int>(A.rows());
    std::mt19937 rng = seeded_rng();
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = unif(rng);
    x.normalize();

    CgConfig mass_cfg;
    mass_cfg.rel_tol = 1e-12;
    mass_cfg.precond = Preconditioner::Jacobi;
    double lambda = 0.0;
    for (int it = 0; it < 50; ++it) {
        const Eigen::VectorXd Ax = spmv(A, x);
        const Eigen::VectorXd y = cg_solve(M, Ax, mass_cfg).x;
        lambda = x.dot(Ax) / x.dot(spmv(M, x));
        const double ny = y.norm();
        if (ny == 0.0) break;  // A x = 0: data in the operator kernel
        x = y / ny;
    }

    report.lambda_max = lambda;
    report.dt_limit = 2.0 / (lambda * (1.0 - 2.0 * theta));
    report.ok = dt * lambda * (1.0 - 2.0 * theta) <= 2.0;
    return report;
}

HeatState::HeatState(const FeSpace& space, const CsrMatrix& M, const CsrMatrix& A,
                     double theta, double dt, Eigen::VectorXd w0)
    : space_(&space), theta_(theta), dt_(dt), w_(std::move(w0)) {
    if (w_.size() != space.n_active)
        throw std::invalid_argument("HeatState: initial vector length mismatch");
    const CflReport cfl = cfl_check(theta, dt, M, A);
    if (!cfl.ok)
        throw std::runtime_error("HeatState: explicit step restriction violated");
    lhs_ = M + theta * dt * A;
    rhs_ = M - (1.0 - theta) * dt * A;
    lhs_.makeCompressed();
    rhs_.makeCompressed();
    cg_ = default_cg(space);
}

void HeatState::advance() {
    const Eigen::VectorXd rhs = spmv(rhs_, w_);
    CgResult result = cg_solve(lhs_, rhs, cg_, w_);
    w_ = std::move(result.x);
    iterations_ += result.iterations;
    ++j_;
#ifndef NDEBUG
    const double res = (rhs - spmv(lhs_, w_)).norm();
    assert(res <= 10.0 * cg_.rel_tol * rhs.norm() + 1e-300);
#endif
}

void theta_step(HeatState& state) { state.advance(); }

double l2_error(const Eigen::Ref<const Eigen::VectorXd>& nodal,
                const ScalarField& exact, const FeSpace& space) {
    if (nodal.size() != space.n_nodes)
        throw std::invalid_argument("l2_error: expected a full nodal vector");
    const Mesh& mesh = space.mesh;
    double acc = 0.0;

    if (mesh.dimension == 1) {
        const int k = space.k;
        const int nen = k + 1;
        const GaussRule rule = gauss_legendre(k + 2);
        double N[3], dN[3];
        for (int e = 0; e < mesh.n; ++e) {
            const double x0 = e * mesh.h;
            for (int q = 0; q < rule.nodes.size(); ++q) {
                const double xi = 0.5 * (rule.nodes[q] + 1.0);
                const double w = 0.5 * rule.weights[q] * mesh.h;
                shape_1d(k, xi, N, dN);
                double uh = 0.0;
                for (int a = 0; a < nen; ++a) uh += N[a] * nodal[k * e + a];
                const double d = uh - exact(x0 + xi * mesh.h, 0.0);
                acc += w * d * d;
            }
        }
    } else {
        const TriangleRule& rule = triangle_rule_deg4();
        for (const Tri& tri : square_triangles(mesh)) {
            double px[3], py[3];
            for (int a = 0; a < 3; ++a) {
                px[a] = space.node_x(tri.v[a]);
                py[a] = space.node_y(tri.v[a]);
            }
            const double det = (px[1] - px[0]) * (py[2] - py[0]) -
                               (px[2] - px[0]) * (py[1] - py[0]);
            const double area = 0.5 * std::abs(det);
            for (int q = 0; q < 6; ++q) {
                double x = 0.0, y = 0.0, uh = 0.0;
                for (int a = 0; a < 3; ++a) {
                    x += rule.bary(q, a) * px[a];
                    y += rule.bary(q, a) * py[a];
                    uh += rule.bary(q, a) * nodal[tri.v[a]];
                }
                const double d = uh - exact(x, y);
                acc += rule.weights[q] * area * d * d;
            }
        }
    }
    return std::sqrt(acc);
}

double fe_eval(const FeSpace& space, const Eigen::Ref<const Eigen::VectorXd>& nodal,
               double x, double y) {
    if (nodal.size() != space.n_nodes)
        throw std::invalid_argument("fe_eval: expected a full nodal vector");
    const Mesh& mesh = space.mesh;

    if (mesh.dimension == 1) {
        int e = static_cast<int>(std::floor(x / mesh.h));
        e = std::clamp(e, 0, mesh.n - 1);
        const double xi = (x - e * mesh.h) / mesh.h;
        double N[3], dN[3];
        shape_1d(space.k, xi, N, dN);
        double v = 0.0;
        for (int a = 0; a <= space.k; ++a) v += N[a] * nodal[space.k * e + a];
        return v;
    }

    const int n = mesh.n, stride = n + 1;
    int i = std::clamp(static_cast<int>(std::floor(x / mesh.h)), 0, n - 1);
    int j = std::clamp(static_cast<int>(std::floor(y / mesh.h)), 0, n - 1);
    const double xi = (x - i * mesh.h) / mesh.h;
    const double eta = (y - j * mesh.h) / mesh.h;
    const double ll = nodal[j * stride + i], lr = nodal[j * stride + i + 1];
    const double ul = nodal[(j + 1) * stride + i], ur = nodal[(j + 1) * stride + i + 1];
    if (eta <= xi)  // lower-right triangle of the diagonal split
        return ll * (1.0 - xi) + lr * (xi - eta) + ur * eta;
    return ll * (1.0 - eta) + ur * xi + ul * (eta - xi);
}

}  // namespace semifrac
