#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "semifrac/spectral.hpp"

using semifrac::BoundaryCondition;
using semifrac::EigenBasis;
using semifrac::SpectralFunction;

namespace {
constexpr double kPi = std::numbers::pi;

std::shared_ptr<const EigenBasis> interval_basis(double L, BoundaryCondition bc, int n) {
    return std::make_shared<const EigenBasis>(semifrac::interval_eigenpairs(L, bc, n));
}

SpectralFunction unit_mode(std::shared_ptr<const EigenBasis> basis, int idx) {
    SpectralFunction u;
    u.basis = basis;
    u.coeffs = Eigen::VectorXd::Zero(basis->count());
    u.coeffs[idx] = 1.0;
    return u;
}
}  // namespace

TEST_CASE("interval eigenfunctions are orthonormal for every boundary condition") {
    for (const auto bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(),
                          BoundaryCondition::robin(1.0)}) {
        const auto basis = interval_basis(1.0, bc, 12);
        for (int i = 0; i < 12; ++i) {
            for (int j = i; j < 12; ++j) {
                const double ip = oracles::gauss(
                    [&](double x) { return basis->eval(i, x) * basis->eval(j, x); },
                    0.0, 1.0, 200);
                if (i == j)
                    REQUIRE(ip == doctest::Approx(1.0).epsilon(1e-10));
                else
                    REQUIRE(std::abs(ip) <= 1e-8);
            }
        }
        for (int i = 1; i < 12; ++i) REQUIRE(basis->lambdas[i] > basis->lambdas[i - 1]);
    }
}

TEST_CASE("dirichlet eigenvalues and eigenfunctions on intervals") {
    const auto basis = interval_basis(1.0, BoundaryCondition::dirichlet(), 6);
    for (int m = 1; m <= 6; ++m) {
        CHECK(basis->lambdas[m - 1] == doctest::Approx(m * m * kPi * kPi).epsilon(1e-13));
        CHECK(basis->eval(m - 1, 0.3) ==
              doctest::Approx(std::sqrt(2.0) * std::sin(m * kPi * 0.3)).epsilon(1e-13));
    }
    const auto wide = interval_basis(2.0, BoundaryCondition::dirichlet(), 3);
    CHECK(wide->lambdas[0] == doctest::Approx(kPi * kPi / 4.0).epsilon(1e-13));
    CHECK(wide->eval(0, 1.0) == doctest::Approx(1.0).epsilon(1e-13));  // sqrt(2/2) sin(pi/2)

    CHECK_THROWS_AS(semifrac::interval_eigenpairs(0.0, BoundaryCondition::dirichlet(), 3),
                    std::domain_error);
    CHECK_THROWS_AS(semifrac::interval_eigenpairs(1.0, BoundaryCondition::dirichlet(), 0),
                    std::domain_error);
}

TEST_CASE("neumann basis drops the constant mode and is mean free") {
    const auto basis = interval_basis(1.0, BoundaryCondition::neumann(), 5);
    CHECK(basis->lambdas[0] == doctest::Approx(kPi * kPi).epsilon(1e-13));
    CHECK(basis->lambdas[1] == doctest::Approx(4.0 * kPi * kPi).epsilon(1e-13));
    CHECK(basis->eval(0, 0.2) ==
          doctest::Approx(std::sqrt(2.0) * std::cos(kPi * 0.2)).epsilon(1e-13));
    for (int i = 0; i < 5; ++i) {
        const double mean =
            oracles::gauss([&](double x) { return basis->eval(i, x); }, 0.0, 1.0, 200);
        REQUIRE(std::abs(mean) <= 1e-12);
    }
}

TEST_CASE("robin wavenumbers solve the characteristic equation inside their brackets") {
    const double kappa = 1.0;
    const auto basis = interval_basis(1.0, BoundaryCondition::robin(kappa), 8);
    for (int m = 1; m <= 8; ++m) {
        const double mu = basis->mu[m - 1];
        CHECK(mu > (m - 1) * kPi);
        CHECK(mu < m * kPi);
        const double resid =
            (mu * mu - kappa * kappa) * std::sin(mu) - 2.0 * kappa * mu * std::cos(mu);
        CHECK(std::abs(resid) <= 1e-9 * (1.0 + mu * mu));
        CHECK(basis->lambdas[m - 1] == doctest::Approx(mu * mu).epsilon(1e-14));
    }
    // first eigenvalue sits strictly between the Neumann and Dirichlet ones
    CHECK(basis->lambdas[0] > 0.0);
    CHECK(basis->lambdas[0] < kPi * kPi);
}

TEST_CASE("square basis is sorted ascending with lexicographic ties") {
    const auto basis = semifrac::square_eigenpairs(5);
    REQUIRE(basis.count() == 25);
    CHECK(basis.lambdas[0] == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-13));
    CHECK(basis.modes2d[0][0] == 1);
    CHECK(basis.modes2d[0][1] == 1);
    CHECK(basis.modes2d[1][0] == 1);  // (1,2) precedes (2,1) at the 5 pi^2 tie
    CHECK(basis.modes2d[1][1] == 2);
    CHECK(basis.modes2d[2][0] == 2);
    CHECK(basis.modes2d[2][1] == 1);
    for (int i = 1; i < basis.count(); ++i)
        REQUIRE(basis.lambdas[i] >= basis.lambdas[i - 1]);
    CHECK(basis.eval(0, 0.5, 0.5) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(basis.eval(1, 0.25, 0.25) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));

    CHECK_THROWS_AS(semifrac::square_eigenpairs(0), std::domain_error);
}

TEST_CASE("projection recovers coefficients of band-limited data") {
    const auto basis = interval_basis(1.0, BoundaryCondition::dirichlet(), 8);
    const auto u2 = semifrac::project(
        [&](double x, double) { return basis->eval(1, x); }, basis);
    CHECK(u2.mean_removed == 0.0);
    for (int i = 0; i < 8; ++i)
        REQUIRE(u2.coeffs[i] == doctest::Approx(i == 1 ? 1.0 : 0.0).epsilon(1e-10));

    const auto combo = semifrac::project(
        [&](double x, double) { return 3.0 * basis->eval(0, x) - 2.0 * basis->eval(4, x); },
        basis);
    CHECK(combo.coeffs[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(combo.coeffs[4] == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(std::abs(combo.coeffs[2]) <= 1e-9);

    CHECK_THROWS_AS(semifrac::project([](double, double) { return 1.0; }, nullptr),
                    std::invalid_argument);
}

TEST_CASE("neumann projection records the removed mean") {
    const auto basis = interval_basis(1.0, BoundaryCondition::neumann(), 6);
    const auto u = semifrac::project(
        [](double x, double) { return 1.0 + std::cos(kPi * x); }, basis);
    CHECK(u.mean_removed == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.coeffs[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
    for (int i = 1; i < 6; ++i) REQUIRE(std::abs(u.coeffs[i]) <= 1e-10);
}

TEST_CASE("square projection recovers a tensor mode") {
    const auto basis =
        std::make_shared<const EigenBasis>(semifrac::square_eigenpairs(4));
    const auto u = semifrac::project(
        [](double x, double y) { return 2.0 * std::sin(kPi * x) * std::sin(2.0 * kPi * y); },
        basis);
    for (int i = 0; i < basis->count(); ++i) {
        const bool hit = basis->modes2d[i][0] == 1 && basis->modes2d[i][1] == 2;
        REQUIRE(u.coeffs[i] == doctest::Approx(hit ? 1.0 : 0.0).epsilon(1e-9));
    }
}

TEST_CASE("semigroup decays each coefficient at its own rate") {
    const auto basis = interval_basis(1.0, BoundaryCondition::dirichlet(), 6);
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    SpectralFunction u;
    u.basis = basis;
    u.coeffs.resize(6);
    for (int i = 0; i < 6; ++i) u.coeffs[i] = unif(rng);

    const auto frozen = semifrac::semigroup_apply(u, 0.0);
    CHECK((frozen.coeffs.array() == u.coeffs.array()).all());

    const auto e1 = unit_mode(basis, 0);
    const auto decayed = semifrac::semigroup_apply(e1, 1.0);
    CHECK(decayed.coeffs[0] == doctest::Approx(std::exp(-kPi * kPi)).epsilon(1e-12));

    const double t = 0.3;
    const auto v = semifrac::semigroup_apply(u, t);
    CHECK(v.coeffs.norm() <=
          std::exp(-basis->lambda_min() * t) * u.coeffs.norm() * (1.0 + 1e-12));

    CHECK_THROWS_AS(semifrac::semigroup_apply(u, -0.1), std::domain_error);
}

TEST_CASE("fractional powers act diagonally") {
    const auto basis = interval_basis(1.0, BoundaryCondition::dirichlet(), 5);
    std::mt19937 rng(88);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    SpectralFunction u;
    u.basis = basis;
    u.coeffs.resize(5);
    for (int i = 0; i < 5; ++i) u.coeffs[i] = unif(rng);

    const auto same = semifrac::frac_power_apply(u, 0.0);
    CHECK((same.coeffs - u.coeffs).norm() == 0.0);

    const auto round_trip =
        semifrac::frac_power_apply(semifrac::frac_power_apply(u, 0.5), -0.5);
    CHECK((round_trip.coeffs - u.coeffs).norm() <= 1e-12 * u.coeffs.norm());

    const auto e1 = unit_mode(basis, 0);
    const auto powered = semifrac::frac_power_apply(e1, 0.5);
    CHECK(powered.coeffs[0] == doctest::Approx(kPi).epsilon(1e-13));

    CHECK_THROWS_AS(semifrac::frac_power_apply(u, 1.5), std::domain_error);
    CHECK_THROWS_AS(semifrac::frac_power_apply(u, -1.0 - 1e-9), std::domain_error);
}

TEST_CASE("sobolev-scale norms") {
    const auto basis = interval_basis(1.0, BoundaryCondition::dirichlet(), 5);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    SpectralFunction u;
    u.basis = basis;
    u.coeffs.resize(5);
    for (int i = 0; i < 5; ++i) u.coeffs[i] = unif(rng);

    CHECK(semifrac::hr_norm(u, 0.0) == doctest::Approx(u.coeffs.norm()).epsilon(1e-14));
    const auto e1 = unit_mode(basis, 0);
    CHECK(semifrac::hr_norm(e1, 2.0) == doctest::Approx(kPi * kPi).epsilon(1e-13));
    // all eigenvalues exceed 1, so the scale is nondecreasing in r
    CHECK(semifrac::hr_norm(u, 0.0) <= semifrac::hr_norm(u, 1.0));
    CHECK(semifrac::hr_norm(u, 1.0) <= semifrac::hr_norm(u, 2.0));
    CHECK_THROWS_AS(semifrac::hr_norm(u, -0.5), std::domain_error);
}

TEST_CASE("series evaluation paths agree") {
    const auto basis = interval_basis(1.0, BoundaryCondition::dirichlet(), 6);
    const auto e1 = unit_mode(basis, 0);
    CHECK(semifrac::evaluate_at(e1, 0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    std::mt19937 rng(111);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    SpectralFunction u;
    u.basis = basis;
    u.coeffs.resize(6);
    for (int i = 0; i < 6; ++i) u.coeffs[i] = unif(rng);

    const auto field = semifrac::to_field(u);
    Eigen::MatrixX2d pts(4, 2);
    pts << 0.1, 0.0, 0.37, 0.0, 0.5, 0.0, 0.93, 0.0;
    const Eigen::VectorXd vals = semifrac::evaluate(u, pts);
    for (int p = 0; p < 4; ++p) {
        REQUIRE(vals[p] == doctest::Approx(field(pts(p, 0), 0.0)).epsilon(1e-14));
        REQUIRE(vals[p] ==
                doctest::Approx(semifrac::evaluate_at(u, pts(p, 0))).epsilon(1e-13));
    }
}

TEST_CASE("square synthesis skips zero coefficients without changing values") {
    const auto basis =
        std::make_shared<const EigenBasis>(semifrac::square_eigenpairs(4));
    SpectralFunction u;
    u.basis = basis;
    u.coeffs = Eigen::VectorXd::Zero(basis->count());
    u.coeffs[0] = 1.5;
    u.coeffs[3] = -0.5;

    const auto field = semifrac::to_field(u);
    for (const double x : {0.2, 0.55}) {
        for (const double y : {0.3, 0.8}) {
            double want = 0.0;
            for (int i = 0; i < basis->count(); ++i)
                want += u.coeffs[i] * basis->eval(i, x, y);
            REQUIRE(field(x, y) == doctest::Approx(want).epsilon(1e-13));
            REQUIRE(semifrac::evaluate_at(u, x, y) ==
                    doctest::Approx(want).epsilon(1e-13));
        }
    }

    SpectralFunction zero;
    zero.basis = basis;
    zero.coeffs = Eigen::VectorXd::Zero(basis->count());
    CHECK(semifrac::to_field(zero)(0.4, 0.6) == 0.0);
}
