#pragma once

#include <functional>
#include <stdexcept>

namespace semifrac {

/// Scalar field on the domain; 1D callers ignore the second coordinate.
using ScalarField = std::function<double(double, double)>;

enum class BcKind { Dirichlet, Neumann, Robin };

struct BoundaryCondition {
    BcKind kind = BcKind::Dirichlet;
    double kappa = 0.0;  // Robin coefficient, > 0

    static BoundaryCondition dirichlet() { return {BcKind::Dirichlet, 0.0}; }
    static BoundaryCondition neumann() { return {BcKind::Neumann, 0.0}; }
    static BoundaryCondition robin(double kappa) {
        if (!(kappa > 0.0))
            throw std::domain_error("Robin coefficient must be positive");
        return {BcKind::Robin, kappa};
    }
};

inline const char* bc_name(BcKind k) {
    switch (k) {
        case BcKind::Dirichlet: return "dirichlet";
        case BcKind::Neumann: return "neumann";
        case BcKind::Robin: return "robin";
    }
    return "?";
}

/// Supported domains: the interval (0, L) and the unit square (0,1)^2.
struct Domain {
    enum class Kind { Interval, UnitSquare };
    Kind kind = Kind::Interval;
    double length = 1.0;  // interval only

    static Domain interval(double L = 1.0) {
        if (!(L > 0.0)) throw std::domain_error("interval length must be positive");
        return {Kind::Interval, L};
    }
    static Domain unit_square() { return {Kind::UnitSquare, 1.0}; }

    int dimension() const { return kind == Kind::Interval ? 1 : 2; }
};

}  // namespace semifrac
