#pragma once

#include <string>
#include <vector>

#include "semifrac/solver.hpp"

namespace semifrac {

enum class CaseId {
    Eig1d,          // first-eigenfunction datum, full FE pipeline
    Eig1dAopt,      // same datum, reduced step coupling a = 2/(1+s)
    Singular1d,     // x^{-1/2+eps} datum against a fine-mesh reference
    Checkerboard2d, // sign datum on the unit square against a series reference
    Step1dBcs,      // sign datum under all three boundary conditions
    Nonhomog1d,     // manufactured solution with nonzero Dirichlet trace
    QuadOnly,       // quadrature applied to the exact semigroup, no FE error
};

const char* case_name(CaseId id);
CaseId case_from_name(const std::string& name);

struct RunConfig {
    CaseId case_id = CaseId::Eig1d;
    std::vector<double> s;
    double r = 1.5;
    int k = 1;
    double theta = 0.5;
    double a = 2.0;  // 0 selects a = 2/(1+s) per s (Eig1dAopt default)
    std::vector<double> h;
    std::string out;
    int ref_modes = 4096;  // spectral reference size (per axis in 2D)
    double ref_h = 0.0;    // fine-mesh reference (Singular1d)
    double kappa = 1.0;    // Robin coefficient where applicable

    static RunConfig defaults_for(CaseId id);
    /// `key = value` per line, '#' comments, lists comma-separated; keys are
    /// the field names above. The case key seeds the per-case defaults.
    static RunConfig from_file(const std::string& path);
};

struct ConvergenceRow {
    std::string case_label;
    double s = 0, r = 0;
    int k = 1;
    double theta = 0.5, a = 2, h = 0, dt = 0;
    int n_t = 0;
    double error_l2 = 0;
    double slope = 0;  // group fit, repeated on each row of the group
    double wall_ms = 0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
};

struct SlopeFit {
    double slope = 0.0;
    double residual = 0.0;  // RMS misfit of the log-log regression
};

/// Log-log least squares over the last min(4, n) points.
SlopeFit fit_slope(const std::vector<double>& h, const std::vector<double>& error);

ConvergenceTable run_case(const RunConfig& config);

/// Truncation node counts against the published reference table
/// (r = 2, k = 1, first eigenvalue pi^2) for a = 2 and a = 2/(1+s).
struct CostRow {
    double s = 0, h = 0, a = 0;
    int n_t = 0;
    int n_t_reference = 0;
    double ratio = 0;
    bool within_factor_two = false;
};

struct CostTable {
    std::vector<CostRow> rows;
    bool all_ok = true;
};

CostTable cost_report();

void emit_csv(const ConvergenceTable& table, const std::string& path);
ConvergenceTable read_csv(const std::string& path);

// Data catalogue.
ScalarField checkerboard_field();
ScalarField step_field();
ScalarField singular_field(double eps = 1e-2);
ScalarField first_eigen_datum(double s);  // lambda_1^s phi_1 on (0, 1)

/// Closed-form coefficients of the checkerboard datum in the square basis.
SpectralFunction checkerboard_coefficients(std::shared_ptr<const EigenBasis> basis);
/// Coefficients of the step datum in an interval basis (closed forms for all
/// three boundary conditions via the antiderivative of the eigenfunction).
SpectralFunction step_coefficients(std::shared_ptr<const EigenBasis> basis);

// Self-contained property checks, also reachable from the CLI.
struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<CheckResult> run_selftests();

}  // namespace semifrac
