#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "semifrac/fem.hpp"

using semifrac::BoundaryCondition;
using semifrac::CsrMatrix;
using semifrac::FeSpace;
using semifrac::Mesh;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd dense(const CsrMatrix& a) { return Eigen::MatrixXd(a); }

int find_node(const FeSpace& space, double x, double y = 0.0) {
    for (int node = 0; node < space.n_nodes; ++node)
        if (std::abs(space.node_x(node) - x) < 1e-12 &&
            std::abs(space.node_y(node) - y) < 1e-12)
            return node;
    FAIL("no node at requested coordinates");
    return -1;
}
}  // namespace

TEST_CASE("1d linear elements produce the classic tridiagonal matrices") {
    const FeSpace space(Mesh::interval(4), 1, BoundaryCondition::dirichlet());
    REQUIRE(space.n_active == 3);
    const auto [M, A] = semifrac::assemble(space);

    Eigen::MatrixXd a_ref(3, 3), m_ref(3, 3);
    a_ref << 8, -4, 0, -4, 8, -4, 0, -4, 8;
    const double h = 0.25;
    m_ref << 4, 1, 0, 1, 4, 1, 0, 1, 4;
    m_ref *= h / 6.0;
    CHECK((dense(A) - a_ref).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((dense(M) - m_ref).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("robin terms add point masses at the interval endpoints") {
    const Mesh mesh = Mesh::interval(2);
    const FeSpace robin(mesh, 1, BoundaryCondition::robin(1.0));
    const FeSpace neumann(mesh, 1, BoundaryCondition::neumann());
    REQUIRE(robin.n_active == 3);
    const auto [Mr, Ar] = semifrac::assemble(robin);
    const auto [Mn, An] = semifrac::assemble(neumann);

    CHECK(dense(Ar)(0, 0) == doctest::Approx(3.0).epsilon(1e-14));  // 1/h + kappa
    Eigen::MatrixXd diff = dense(Ar) - dense(An);
    Eigen::MatrixXd want = Eigen::MatrixXd::Zero(3, 3);
    want(0, 0) = 1.0;
    want(2, 2) = 1.0;
    CHECK((diff - want).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((dense(Mr) - dense(Mn)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("neumann stiffness annihilates constants and mass sums to the volume") {
    const FeSpace line(Mesh::interval(5, 2.0), 1, BoundaryCondition::neumann());
    const auto [M, A] = semifrac::assemble(line);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(line.n_active);
    CHECK(semifrac::spmv(A, ones).norm() <= 1e-12);
    CHECK(ones.dot(semifrac::spmv(M, ones)) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK((dense(A) - dense(A).transpose()).cwiseAbs().maxCoeff() <= 1e-12);

    const FeSpace square(Mesh::unit_square(4), 1, BoundaryCondition::neumann());
    const auto [M2, A2] = semifrac::assemble(square);
    const Eigen::VectorXd ones2 = Eigen::VectorXd::Ones(square.n_active);
    CHECK(semifrac::spmv(A2, ones2).norm() <= 1e-12);
    CHECK(ones2.dot(semifrac::spmv(M2, ones2)) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("interior 2d stencil is the five-point one") {
    const FeSpace space(Mesh::unit_square(4), 1, BoundaryCondition::dirichlet());
    REQUIRE(space.n_active == 9);
    const auto [M, A] = semifrac::assemble(space);
    const Eigen::MatrixXd a = dense(A);

    const int center = space.active_of_node[find_node(space, 0.5, 0.5)];
    CHECK(a(center, center) == doctest::Approx(4.0).epsilon(1e-13));
    for (const auto& [dx, dy] : std::vector<std::pair<double, double>>{
             {0.25, 0.0}, {-0.25, 0.0}, {0.0, 0.25}, {0.0, -0.25}}) {
        const int nb = space.active_of_node[find_node(space, 0.5 + dx, 0.5 + dy)];
        REQUIRE(a(center, nb) == doctest::Approx(-1.0).epsilon(1e-13));
    }
    for (const auto& [dx, dy] : std::vector<std::pair<double, double>>{
             {0.25, 0.25}, {-0.25, -0.25}, {0.25, -0.25}, {-0.25, 0.25}}) {
        const int nb = space.active_of_node[find_node(space, 0.5 + dx, 0.5 + dy)];
        REQUIRE(std::abs(a(center, nb)) <= 1e-14);
    }
}

TEST_CASE("lumped mass is the diagonal of row sums") {
    for (const auto& mesh : {Mesh::interval(7), Mesh::unit_square(3)}) {
        const FeSpace space(mesh, 1, BoundaryCondition::neumann());
        const auto [M, A] = semifrac::assemble(space);
        const CsrMatrix L = semifrac::assemble_lumped_mass(space);
        const Eigen::MatrixXd ld = dense(L);
        CHECK((ld - Eigen::MatrixXd(ld.diagonal().asDiagonal())).cwiseAbs().maxCoeff() ==
              0.0);
        CHECK(ld.diagonal().minCoeff() > 0.0);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.n_active);
        CHECK((semifrac::spmv(L, ones) - semifrac::spmv(M, ones)).norm() <= 1e-14);
    }
}

TEST_CASE("l2 projection reproduces functions inside the space") {
    const FeSpace p1(Mesh::interval(8), 1, BoundaryCondition::neumann());
    const Eigen::VectorXd affine =
        semifrac::l2_project([](double x, double) { return 2.0 + 3.0 * x; }, p1);
    for (int a = 0; a < p1.n_active; ++a) {
        const double x = p1.node_x(p1.node_of_active[a]);
        REQUIRE(affine[a] == doctest::Approx(2.0 + 3.0 * x).epsilon(1e-10));
    }

    const FeSpace p2(Mesh::interval(6), 2, BoundaryCondition::neumann());
    const Eigen::VectorXd quad =
        semifrac::l2_project([](double x, double) { return x * x; }, p2);
    for (int a = 0; a < p2.n_active; ++a) {
        const double x = p2.node_x(p2.node_of_active[a]);
        REQUIRE(quad[a] == doctest::Approx(x * x).epsilon(1e-10));
    }

    const FeSpace sq(Mesh::unit_square(4), 1, BoundaryCondition::neumann());
    const auto [Msq, Asq] = semifrac::assemble(sq);
    const Eigen::VectorXd c = semifrac::l2_project(
        [](double, double) { return 2.5; }, sq, Msq);
    CHECK((c.array() - 2.5).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("l2 projection error decays at second order for linear elements") {
    const auto f = [](double x, double) { return std::sin(kPi * x); };
    std::vector<double> hs, errs;
    for (const int n : {8, 16, 32, 64}) {
        const FeSpace space(Mesh::interval(n), 1, BoundaryCondition::dirichlet());
        const Eigen::VectorXd w = semifrac::l2_project(f, space);
        hs.push_back(space.mesh.h);
        errs.push_back(semifrac::l2_error(space.to_nodal(w), f, space));
    }
    const double slope = oracles::loglog_slope(hs, errs);
    CHECK(std::abs(slope - 2.0) <= 0.1);
}

TEST_CASE("l2 error measures exactly known fields") {
    const FeSpace space(Mesh::interval(32), 1, BoundaryCondition::dirichlet());
    Eigen::VectorXd nodal(space.n_nodes);
    for (int i = 0; i < space.n_nodes; ++i) nodal[i] = 2.0 + 3.0 * space.node_x(i);
    CHECK(semifrac::l2_error(nodal, [](double x, double) { return 2.0 + 3.0 * x; },
                             space) <= 1e-12);

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(space.n_nodes);
    const double norm_mode = semifrac::l2_error(
        zero, [](double x, double) { return std::sqrt(2.0) * std::sin(kPi * x); }, space);
    CHECK(norm_mode == doctest::Approx(1.0).epsilon(1e-7));

    CHECK_THROWS_AS(
        semifrac::l2_error(Eigen::VectorXd::Zero(space.n_active),
                           [](double, double) { return 0.0; }, space),
        std::invalid_argument);
}

TEST_CASE("heat stepping converges at the order of the element") {
    const double t_end = 0.1;
    const auto exact = [&](double x, double) {
        return std::exp(-kPi * kPi * t_end) * std::sqrt(2.0) * std::sin(kPi * x);
    };
    const auto initial = [](double x, double) {
        return std::sqrt(2.0) * std::sin(kPi * x);
    };

    for (const int k : {1, 2}) {
        std::vector<double> hs, errs;
        for (const int n : {8, 16, 32, 64}) {
            const FeSpace space(Mesh::interval(n), k, BoundaryCondition::dirichlet());
            const auto [M, A] = semifrac::assemble(space);
            // time step small enough that the march never limits the rate
            const double dt_goal = space.mesh.h * space.mesh.h / (k == 1 ? 1.0 : 4.0);
            const int steps = static_cast<int>(std::ceil(t_end / dt_goal));
            semifrac::HeatState state(space, M, A, 0.5, t_end / steps,
                                      semifrac::l2_project(initial, space, M));
            for (int j = 0; j < steps; ++j) state.advance();
            REQUIRE(state.step_index() == steps);
            hs.push_back(space.mesh.h);
            errs.push_back(semifrac::l2_error(space.to_nodal(state.w()), exact, space));
        }
        const double slope = oracles::loglog_slope(hs, errs);
        CAPTURE(k);
        CHECK(slope >= (k == 1 ? 1.85 : 2.8));
        CHECK(slope <= (k == 1 ? 2.15 : 3.2));
    }
}

TEST_CASE("theta stepping mechanics") {
    const FeSpace space(Mesh::interval(8), 1, BoundaryCondition::dirichlet());
    const auto [M, A] = semifrac::assemble(space);

    SUBCASE("a zero operator leaves the state untouched") {
        CsrMatrix zero(space.n_active, space.n_active);
        zero.setZero();
        Eigen::VectorXd w0(space.n_active);
        for (int i = 0; i < space.n_active; ++i) w0[i] = std::cos(1.7 * i);
        semifrac::HeatState state(space, M, zero, 1.0, 0.3, w0);
        semifrac::theta_step(state);
        semifrac::theta_step(state);
        CHECK(state.step_index() == 2);
        CHECK((state.w().array() == w0.array()).all());
        CHECK(state.solver_iterations() == 0);
    }

    SUBCASE("backward euler scales a generalized eigenvector") {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense(A), dense(M));
        const double lambda = eig.eigenvalues()[0];
        const Eigen::VectorXd v = eig.eigenvectors().col(0);
        const double dt = 0.01;
        semifrac::HeatState state(space, M, A, 1.0, dt, v);
        state.advance();
        const Eigen::VectorXd want = v / (1.0 + dt * lambda);
        CHECK((state.w() - want).norm() <= 1e-9 * want.norm());
    }

    SUBCASE("initial vector must match the active count") {
        CHECK_THROWS_AS(
            semifrac::HeatState(space, M, A, 0.5, 0.1, Eigen::VectorXd::Zero(3)),
            std::invalid_argument);
    }
}

TEST_CASE("explicit step restriction") {
    const FeSpace space(Mesh::interval(32), 1, BoundaryCondition::dirichlet());
    const auto [M, A] = semifrac::assemble(space);
    const double h = space.mesh.h;

    const auto implicit_ok = semifrac::cfl_check(0.5, 100.0, M, A);
    CHECK(implicit_ok.ok);
    CHECK(std::isinf(implicit_ok.dt_limit));

    const auto report = semifrac::cfl_check(0.0, h, M, A);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense(A), dense(M));
    const double lambda_max = eig.eigenvalues().maxCoeff();
    CHECK(report.lambda_max == doctest::Approx(lambda_max).epsilon(0.01));
    CHECK(report.lambda_max <= 12.0 / (h * h) * 1.0001);
    CHECK_FALSE(report.ok);  // dt = h is far beyond the parabolic limit

    CHECK(semifrac::cfl_check(0.0, report.dt_limit * 0.999, M, A).ok);
    CHECK_FALSE(semifrac::cfl_check(0.0, report.dt_limit * 1.001, M, A).ok);

    CHECK_THROWS_AS(semifrac::HeatState(space, M, A, 0.0, h,
                                        Eigen::VectorXd::Zero(space.n_active)),
                    std::runtime_error);
    CHECK_THROWS_AS(semifrac::cfl_check(-0.1, 0.1, M, A), std::domain_error);
    CHECK_THROWS_AS(semifrac::cfl_check(1.1, 0.1, M, A), std::domain_error);
    CHECK_THROWS_AS(semifrac::cfl_check(0.5, 0.0, M, A), std::domain_error);
}

TEST_CASE("implicit lumped stepping preserves positivity") {
    const FeSpace space(Mesh::interval(16), 1, BoundaryCondition::dirichlet());
    const auto [M, A] = semifrac::assemble(space);
    const CsrMatrix L = semifrac::assemble_lumped_mass(space);
    std::mt19937 rng(303);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd w0(space.n_active);
    for (int i = 0; i < space.n_active; ++i) w0[i] = unif(rng);

    semifrac::HeatState state(space, L, A, 1.0, 0.05, w0);
    for (int j = 0; j < 20; ++j) {
        state.advance();
        REQUIRE(state.w().minCoeff() >= -1e-12 * w0.maxCoeff());
    }
}

TEST_CASE("dof bookkeeping") {
    const FeSpace d1(Mesh::interval(8), 1, BoundaryCondition::dirichlet());
    CHECK(d1.n_nodes == 9);
    CHECK(d1.n_active == 7);
    CHECK(d1.active_of_node[0] == -1);
    CHECK(d1.active_of_node[8] == -1);
    CHECK(d1.node_of_active[0] == 1);
    CHECK(d1.is_boundary_node(0));
    CHECK(d1.is_boundary_node(8));
    CHECK_FALSE(d1.is_boundary_node(4));

    const FeSpace n1(Mesh::interval(8), 1, BoundaryCondition::neumann());
    CHECK(n1.n_active == 9);

    const FeSpace d2(Mesh::interval(8), 2, BoundaryCondition::dirichlet());
    CHECK(d2.n_nodes == 17);
    CHECK(d2.n_active == 15);
    CHECK(d2.node_x(3) == doctest::Approx(3.0 / 16.0).epsilon(1e-15));

    const FeSpace sq(Mesh::unit_square(4), 1, BoundaryCondition::dirichlet());
    CHECK(sq.n_nodes == 25);
    CHECK(sq.n_active == 9);
    CHECK(sq.node_y(12) == doctest::Approx(0.5).epsilon(1e-15));

    const Eigen::VectorXd nodal = d1.to_nodal(Eigen::VectorXd::Ones(7));
    CHECK(nodal[0] == 0.0);
    CHECK(nodal[8] == 0.0);
    CHECK(nodal.segment(1, 7).minCoeff() == 1.0);
    CHECK_THROWS_AS(d1.to_nodal(Eigen::VectorXd::Ones(9)), std::invalid_argument);

    CHECK_THROWS_AS(Mesh::interval(0), std::domain_error);
    CHECK_THROWS_AS(Mesh::interval(4, -1.0), std::domain_error);
    CHECK_THROWS_AS(Mesh::unit_square(0), std::domain_error);
    CHECK_THROWS_AS(FeSpace(Mesh::interval(4), 3, BoundaryCondition::dirichlet()),
                    std::domain_error);
    CHECK_THROWS_AS(FeSpace(Mesh::unit_square(4), 2, BoundaryCondition::dirichlet()),
                    std::domain_error);
}

TEST_CASE("pointwise evaluation reproduces fields inside the space") {
    const FeSpace p1(Mesh::interval(8), 1, BoundaryCondition::neumann());
    Eigen::VectorXd affine(p1.n_nodes);
    for (int i = 0; i < p1.n_nodes; ++i) affine[i] = 2.0 + 3.0 * p1.node_x(i);
    for (const double x : {0.0, 0.13, 0.5, 0.77, 1.0})
        REQUIRE(semifrac::fe_eval(p1, affine, x) ==
                doctest::Approx(2.0 + 3.0 * x).epsilon(1e-13));

    const FeSpace p2(Mesh::interval(4), 2, BoundaryCondition::neumann());
    Eigen::VectorXd quad(p2.n_nodes);
    for (int i = 0; i < p2.n_nodes; ++i) quad[i] = std::pow(p2.node_x(i), 2);
    for (const double x : {0.1, 0.33, 0.62, 0.9})
        REQUIRE(semifrac::fe_eval(p2, quad, x) == doctest::Approx(x * x).epsilon(1e-12));

    const FeSpace sq(Mesh::unit_square(5), 1, BoundaryCondition::neumann());
    Eigen::VectorXd plane(sq.n_nodes);
    for (int i = 0; i < sq.n_nodes; ++i)
        plane[i] = 1.0 + 2.0 * sq.node_x(i) - 0.5 * sq.node_y(i);
    for (const auto& [x, y] : std::vector<std::pair<double, double>>{
             {0.13, 0.71}, {0.71, 0.13}, {0.5, 0.5}, {0.999, 0.001}, {0.3, 0.3}}) {
        REQUIRE(semifrac::fe_eval(sq, plane, x, y) ==
                doctest::Approx(1.0 + 2.0 * x - 0.5 * y).epsilon(1e-12));
    }

    CHECK_THROWS_AS(semifrac::fe_eval(p1, Eigen::VectorXd::Zero(3), 0.5),
                    std::invalid_argument);
}
