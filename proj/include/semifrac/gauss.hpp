#pragma once

#include <Eigen/Dense>
#include <functional>

namespace semifrac {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// Nodes and weights by Newton iteration on the Legendre recurrence.
/// Exact for polynomials of degree 2n-1.
GaussRule gauss_legendre(int n);

/// Composite Gauss integration of f over [a, b] with `cells` equal cells
/// and an n-point rule per cell.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int cells, int points_per_cell);

/// Symmetric 6-point rule on the reference triangle, exact for degree 4.
/// Barycentric coordinates row-wise; weights sum to 1 (scale by element area).
struct TriangleRule {
    Eigen::Matrix<double, 6, 3> bary;
    Eigen::Matrix<double, 6, 1> weights;
};

const TriangleRule& triangle_rule_deg4();

}  // namespace semifrac
