#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "semifrac/types.hpp"

namespace semifrac {

/// Eigenpairs of the Laplacian on an interval or on the unit square,
/// retained in ascending eigenvalue order (ties in the square case broken
/// lexicographically by tensor indices). The Neumann zero mode is dropped,
/// so every retained eigenvalue is positive.
struct EigenBasis {
    Domain domain;
    BoundaryCondition bc;
    Eigen::VectorXd lambdas;

    // Interval: per-mode wavenumber mu_m (lambda = mu^2) and L2 normalization.
    Eigen::VectorXd mu;
    Eigen::VectorXd norm_c;

    // Unit square: tensor indices (m, n) per retained mode.
    std::vector<std::array<int, 2>> modes2d;

    int count() const { return static_cast<int>(lambdas.size()); }
    double lambda_min() const { return lambdas[0]; }

    /// Pointwise value of eigenfunction `idx` (second coordinate ignored in 1D).
    double eval(int idx, double x, double y = 0.0) const;
};

/// Interval (0, L) eigenpairs for the requested boundary condition.
/// Robin wavenumbers solve tan(mu L) = 2 kappa mu / (mu^2 - kappa^2),
/// one root per bracket ((m-1) pi / L, m pi / L), found by bisection.
EigenBasis interval_eigenpairs(double L, BoundaryCondition bc, int n_modes);

/// Unit square Dirichlet eigenpairs lambda_{mn} = pi^2 (m^2 + n^2) with
/// m, n in 1..per_axis, phi_{mn} = 2 sin(m pi x) sin(n pi y).
EigenBasis square_eigenpairs(int per_axis);

/// A function represented by coefficients in an eigenbasis.
struct SpectralFunction {
    std::shared_ptr<const EigenBasis> basis;
    Eigen::VectorXd coeffs;
    double mean_removed = 0.0;  // Neumann projections subtract the mean
};

/// L2 projection of f onto the basis by composite Gauss quadrature,
/// refined per mode so oscillatory modes stay resolved. Neumann
/// projections subtract the domain mean of f first and record it.
SpectralFunction project(const ScalarField& f,
                         std::shared_ptr<const EigenBasis> basis,
                         int quad_points_per_cell = 8);

/// Heat semigroup at time t >= 0: coefficients scaled by exp(-lambda t).
SpectralFunction semigroup_apply(const SpectralFunction& u, double t);

/// Spectral fractional power: coefficients scaled by lambda^sigma,
/// sigma in [-1, 1].
SpectralFunction frac_power_apply(const SpectralFunction& u, double sigma);

/// Sobolev-scale norm (sum lambda^r |u_m|^2)^(1/2), r >= 0.
double hr_norm(const SpectralFunction& u, double r);

/// Pointwise synthesis of the series.
double evaluate_at(const SpectralFunction& u, double x, double y = 0.0);

/// Series values at a list of points (rows x, y).
Eigen::VectorXd evaluate(const SpectralFunction& u,
                         const Eigen::Ref<const Eigen::MatrixX2d>& points);

/// Wraps the series as a ScalarField; sparsity of the coefficient vector is
/// detected once at wrap time, which matters for tensor data whose nonzero
/// pattern is thin.
ScalarField to_field(const SpectralFunction& u);

}  // namespace semifrac
