#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "semifrac/linalg.hpp"
#include "semifrac/types.hpp"

namespace semifrac {

/// Uniform mesh: n cells on (0, L), or an n x n grid of squares on the unit
/// square, each square split along the lower-left to upper-right diagonal.
struct Mesh {
    int dimension = 1;
    int n = 1;        // cells per axis
    double h = 1.0;   // cell size, h * n = length
    double length = 1.0;

    static Mesh interval(int n_cells, double L = 1.0);
    static Mesh unit_square(int n_cells_per_axis);
};

/// Continuous Lagrange space of order k (k = 2 in 1D only). Dirichlet
/// conditions are imposed strongly: boundary nodes are excluded from the
/// active dof set; Neumann and Robin keep all nodes active.
struct FeSpace {
    Mesh mesh;
    int k = 1;
    BoundaryCondition bc;

    int n_nodes = 0;
    int n_active = 0;
    std::vector<int> node_of_active;
    std::vector<int> active_of_node;  // -1 where constrained

    FeSpace(const Mesh& mesh, int order, BoundaryCondition bc);

    double node_x(int node) const;
    double node_y(int node) const;
    bool is_boundary_node(int node) const;

    /// Active vector -> full nodal vector, constrained entries zero.
    Eigen::VectorXd to_nodal(const Eigen::Ref<const Eigen::VectorXd>& active) const;
};

/// Consistent mass and stiffness matrices on the active dofs. Robin
/// conditions add the kappa-weighted boundary mass to the stiffness.
std::pair<CsrMatrix, CsrMatrix> assemble(const FeSpace& space);

/// Row-sum lumped mass matrix (diagonal).
CsrMatrix assemble_lumped_mass(const FeSpace& space);

/// L2 projection: solves M w = (f, phi_i) with element quadrature exact
/// beyond degree 2k+2. The overload without M assembles it on the fly.
Eigen::VectorXd l2_project(const ScalarField& f, const FeSpace& space,
                           const CsrMatrix& M);
Eigen::VectorXd l2_project(const ScalarField& f, const FeSpace& space);

struct CflReport {
    bool ok = true;
    double lambda_max = 0.0;  // estimated max eigenvalue of M^{-1} A
    double dt_limit = 0.0;    // largest admissible step (inf when theta >= 1/2)
};

/// Explicit-range step restriction dt * lambda_max * (1 - 2 theta) <= 2.
/// Unconditional for theta >= 1/2; otherwise lambda_max is estimated by
/// 50 seeded power iterations.
CflReport cfl_check(double theta, double dt, const CsrMatrix& M, const CsrMatrix& A);

/// One-leg theta scheme for w' + L w = 0 with cached operators:
///   (M + theta dt A) w_j = (M - (1-theta) dt A) w_{j-1}.
class HeatState {
public:
    HeatState(const FeSpace& space, const CsrMatrix& M, const CsrMatrix& A,
              double theta, double dt, Eigen::VectorXd w0);

    const Eigen::VectorXd& w() const { return w_; }
    int step_index() const { return j_; }
    long solver_iterations() const { return iterations_; }
    double dt() const { return dt_; }
    const FeSpace& space() const { return *space_; }

    void advance();

private:
    const FeSpace* space_;
    CsrMatrix lhs_;   // M + theta dt A
    CsrMatrix rhs_;   // M - (1 - theta) dt A
    double theta_;
    double dt_;
    int j_ = 0;
    long iterations_ = 0;
    Eigen::VectorXd w_;
    CgConfig cg_;
};

/// Free-function form of HeatState::advance.
void theta_step(HeatState& state);

/// || u_h - exact ||_{L2} with element quadrature exact beyond degree 2k+2.
/// `nodal` is a full nodal vector (constrained entries included).
double l2_error(const Eigen::Ref<const Eigen::VectorXd>& nodal,
                const ScalarField& exact, const FeSpace& space);

/// Pointwise value of the FE field given by a full nodal vector.
double fe_eval(const FeSpace& space, const Eigen::Ref<const Eigen::VectorXd>& nodal,
               double x, double y = 0.0);

}  // namespace semifrac
