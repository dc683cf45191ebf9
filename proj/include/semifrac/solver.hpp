#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <optional>

#include "semifrac/fem.hpp"
#include "semifrac/quadrature.hpp"
#include "semifrac/spectral.hpp"
#include "semifrac/types.hpp"

namespace semifrac {

/// Boundary datum g. In 1D the two endpoint values; on the unit square one
/// trace function per edge (bottom, right, top, left), parameterized by the
/// running coordinate. Null edge functions mean zero data.
struct BoundaryData {
    double left = 0.0;
    double right = 0.0;
    std::array<std::function<double(double)>, 4> edges{};
};

/// (-L)^s u = f with B(u) = g on the boundary, where L is the Laplacian
/// subject to the homogeneous form of B.
struct FractionalProblem {
    Domain domain;
    BoundaryCondition bc;
    double s = 0.5;
    double r = 0.0;  // regularity index of f, drives the quadrature branch
    ScalarField f;
    /// Optional coefficient form of f; spectral paths use it directly
    /// instead of projecting the point values.
    std::optional<SpectralFunction> f_spectral;
    std::optional<BoundaryData> g;
};

struct DiscretizationParams {
    double h = 1.0 / 8.0;
    double a = 2.0;       // step coupling dt = h^a, a in (0, 2]
    int k = 1;            // FE order
    double theta = 0.5;   // time scheme
    double safety = 1.01; // truncation safety factor
    /// The second-order scheme is required for the linear-interpolant
    /// branches; set to run them with theta != 1/2 anyway.
    bool override_theta_policy = false;
};

struct SolveResult {
    Eigen::VectorXd U;  // full nodal vector
    std::shared_ptr<const FeSpace> space;
    QuadratureSpec quad;
    int n_steps = 0;
    double wall_ms = 0.0;
    long cg_iterations = 0;
};

/// Homogeneous-boundary solve: project f, march the heat equation with the
/// theta scheme, and accumulate the weighted samples in one streaming pass.
SolveResult solve_homogeneous(const FractionalProblem& problem,
                              const DiscretizationParams& params);

/// Same quadrature applied to the exact (oracle) semigroup; no spatial error.
SpectralFunction solve_spectral_quadrature(const FractionalProblem& problem,
                                           double dt, double safety = 1.01,
                                           int n_modes = 4096);

/// Harmonic lift z of the boundary datum: Dirichlet data are eliminated
/// strongly, flux and Robin data enter as boundary loads. Neumann data must
/// be compatible (zero total flux); the mean-zero representative is returned.
Eigen::VectorXd lift_boundary(const BoundaryData& g, const FeSpace& space);

/// u = homogeneous solve + boundary lift. With trivial g this reproduces
/// solve_homogeneous exactly.
SolveResult solve_nonhomogeneous(const FractionalProblem& problem,
                                 const DiscretizationParams& params);

/// Smallest generalized eigenvalue of (A, M) by inverse power iteration,
/// deflating constants when the operator has them in its kernel. Falls back
/// to half the last estimate if the iteration stagnates.
double estimate_lambda_min(const CsrMatrix& M, const CsrMatrix& A,
                           bool deflate_constants = false);

/// First eigenvalue of the continuous operator, from the closed forms or the
/// Robin root solve.
double oracle_lambda_min(const Domain& domain, const BoundaryCondition& bc);

}  // namespace semifrac
