#pragma once

#include <Eigen/Dense>
#include <utility>

namespace semifrac {

/// Weight branch of the singular-measure quadrature. The branch is selected
/// from the data regularity index r relative to the fractional order s:
/// smoother data admit higher-order interpolation of the semigroup samples.
enum class RegularityMode {
    PiecewiseConstant,  // r in [0, 2-2s]: left-constant cells
    MixedFirstCell,     // r in (2-2s, 2): constant first cell, linear after
    PiecewiseLinear,    // r in [2, 4-2s]: linear everywhere
    NegativeOrder,      // r in (-2s, 0): first cell dropped, left-constant after
};

RegularityMode classify_regularity(double s, double r);

/// Discretization of the integral representation
///   u = (1/Gamma(s)) \int_0^\infty e^{t L} f t^{s-1} dt
/// on the uniform grid t_j = j*dt, j = 0..n_t, truncated at T = n_t*dt.
struct QuadratureSpec {
    double s;    // fractional power, in (0, 1)
    double r;    // data regularity index, in (-2s, 4-2s]
    double dt;   // node spacing, positive
    double T;    // truncation horizon, = n_t * dt exactly
    int n_t;     // number of cells; samples live at n_t + 1 nodes
    RegularityMode mode;

    /// Rounds the requested horizon up to a whole number of cells.
    QuadratureSpec(double s, double r, double dt, double T_request);
};

/// Node weights beta_j >= 0 such that
///   Q[rho] = (1/gamma_s) * sum_j beta_j rho(t_j)
/// integrates the interpolant of rho against t^{s-1} exactly.
struct WeightVector {
    Eigen::VectorXd beta;  // length n_t + 1
    double gamma_s;        // Gamma(s)
};

WeightVector compute_weights(const QuadratureSpec& spec);

/// Truncation horizon making the dropped tail commensurate with the
/// interpolation error: T = safety * (r/2 + s) / lambda_min * log(1/dt),
/// rounded up to a whole number of cells. Returns (T, n_t).
std::pair<double, int> choose_truncation(double s, double r, double dt,
                                         double lambda_min, double safety = 1.01);

/// Q[rho] for samples rho(t_j), j = 0..n_t.
double apply_quadrature(const WeightVector& weights,
                        const Eigen::Ref<const Eigen::VectorXd>& samples);

/// Value of the mode's interpolant at t in [0, T). Cells are half-open,
/// so the node value rho(t_j) is reproduced exactly at t = t_j for every
/// mode that uses it (NegativeOrder is zero on the first cell).
double interpolant_eval(RegularityMode mode,
                        const Eigen::Ref<const Eigen::VectorXd>& samples,
                        double dt, double t);

}  // namespace semifrac
