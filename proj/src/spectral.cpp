#include "semifrac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "semifrac/gauss.hpp"

namespace semifrac {

namespace {

constexpr double kPi = std::numbers::pi;

double robin_residual(double mu, double kappa, double L) {
    // Continuous form of tan(mu L) = 2 kappa mu / (mu^2 - kappa^2); no poles.
    return (mu * mu - kappa * kappa) * std::sin(mu * L) -
           2.0 * kappa * mu * std::cos(mu * L);
}

double robin_root(int m, double kappa, double L) {
    double lo = (m - 1) * kPi / L;
    double hi = m * kPi / L;
    // The bracket endpoints are never roots (residual = -2 kappa mu cos(m pi)),
    // and exactly one eigenvalue lies inside.
    double flo = robin_residual(lo, kappa, L);
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = robin_residual(mid, kappa, L);
        if ((flo <= 0.0) == (fmid <= 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double robin_shape(double mu, double kappa, double x) {
    return std::cos(mu * x) + (kappa / mu) * std::sin(mu * x);
}

}  // namespace

double EigenBasis::eval(int idx, double x, double y) const {
    if (domain.kind == Domain::Kind::UnitSquare) {
        const auto [m, n] = modes2d[idx];
        return 2.0 * std::sin(m * kPi * x) * std::sin(n * kPi * y);
    }
    switch (bc.kind) {
        case BcKind::Dirichlet: return norm_c[idx] * std::sin(mu[idx] * x);
        case BcKind::Neumann: return norm_c[idx] * std::cos(mu[idx] * x);
        case BcKind::Robin: return norm_c[idx] * robin_shape(mu[idx], bc.kappa, x);
    }
    return 0.0;
}

EigenBasis interval_eigenpairs(double L, BoundaryCondition bc, int n_modes) {
    if (!(L > 0.0)) throw std::domain_error("interval_eigenpairs: L must be positive");
    if (n_modes < 1) throw std::domain_error("interval_eigenpairs: need >= 1 mode");

    EigenBasis basis;
    basis.domain = Domain::interval(L);
    basis.bc = bc;
    basis.lambdas.resize(n_modes);
    basis.mu.resize(n_modes);
    basis.norm_c.resize(n_modes);

    const double c_trig = std::sqrt(2.0 / L);
    const GaussRule rule = gauss_legendre(64);

    for (int m = 1; m <= n_modes; ++m) {
        const int i = m - 1;
        switch (bc.kind) {
            case BcKind::Dirichlet:
            case BcKind::Neumann:
                // Neumann drops the constant zero mode; both families share
                // wavenumbers m pi / L and the sqrt(2/L) normalization.
                basis.mu[i] = m * kPi / L;
                basis.norm_c[i] = c_trig;
                break;
            case BcKind::Robin: {
                const double mu = robin_root(m, bc.kappa, L);
                basis.mu[i] = mu;
                double nrm2 = 0.0;
                for (int q = 0; q < 64; ++q) {
                    const double x = 0.5 * L * (rule.nodes[q] + 1.0);
                    const double v = robin_shape(mu, bc.kappa, x);
                    nrm2 += rule.weights[q] * v * v;
                }
                nrm2 *= 0.5 * L;
                basis.norm_c[i] = 1.0 / std::sqrt(nrm2);
                break;
            }
        }
        basis.lambdas[i] = basis.mu[i] * basis.mu[i];
    }
    return basis;
}

EigenBasis square_eigenpairs(int per_axis) {
    if (per_axis < 1) throw std::domain_error("square_eigenpairs: need >= 1 mode per axis");

    struct Mode {
        double lambda;
        int m, n;
    };
    std::vector<Mode> modes;
    modes.reserve(static_cast<size_t>(per_axis) * per_axis);
    for (int m = 1; m <= per_axis; ++m)
        for (int n = 1; n <= per_axis; ++n)
            modes.push_back({kPi * kPi * (m * m + n * n), m, n});
    std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        if (a.m != b.m) return a.m < b.m;
        return a.n < b.n;
    });

    EigenBasis basis;
    basis.domain = Domain::unit_square();
    basis.bc = BoundaryCondition::dirichlet();
    basis.lambdas.resize(modes.size());
    basis.modes2d.resize(modes.size());
    for (size_t i = 0; i < modes.size(); ++i) {
        basis.lambdas[i] = modes[i].lambda;
        basis.modes2d[i] = {modes[i].m, modes[i].n};
    }
    return basis;
}

SpectralFunction project(const ScalarField& f,
                         std::shared_ptr<const EigenBasis> basis,
                         int quad_points_per_cell) {
    if (!basis) throw std::invalid_argument("project: null basis");
    const int q = std::max(2, quad_points_per_cell);
    const GaussRule rule = gauss_legendre(q);

    SpectralFunction out;
    out.basis = basis;
    out.coeffs.resize(basis->count());

    if (basis->domain.kind == Domain::Kind::Interval) {
        const double L = basis->domain.length;

        double mean = 0.0;
        if (basis->bc.kind == BcKind::Neumann) {
            mean = integrate([&](double x) { return f(x, 0.0); }, 0.0, L, 256, q) / L;
            out.mean_removed = mean;
        }

        for (int i = 0; i < basis->count(); ++i) {
            // Resolve the i-th mode: at least two cells per oscillation.
            const int waves = static_cast<int>(std::ceil(basis->mu[i] * L / kPi));
            const int cells = std::max(32, 4 * waves);
            const double h = L / cells;
            double acc = 0.0;
            for (int c = 0; c < cells; ++c) {
                const double mid = (c + 0.5) * h;
                for (int k = 0; k < q; ++k) {
                    const double x = mid + 0.5 * h * rule.nodes[k];
                    acc += rule.weights[k] * (f(x, 0.0) - mean) * basis->eval(i, x);
                }
            }
            out.coeffs[i] = acc * 0.5 * h;
        }
        return out;
    }

    // Unit square: tensor composite grid sized by the largest retained index.
    int max_idx = 1;
    for (const auto& mn : basis->modes2d) max_idx = std::max({max_idx, mn[0], mn[1]});
    const int cells = std::max(16, 2 * max_idx);
    const double h = 1.0 / cells;

    // f sampled once on the tensor Gauss grid, then contracted against
    // per-axis sine tables mode by mode.
    const int npts = cells * q;
    Eigen::VectorXd coord(npts), wt(npts);
    for (int c = 0; c < cells; ++c)
        for (int k = 0; k < q; ++k) {
            coord[c * q + k] = (c + 0.5) * h + 0.5 * h * rule.nodes[k];
            wt[c * q + k] = 0.5 * h * rule.weights[k];
        }
    Eigen::MatrixXd fvals(npts, npts);
    for (int a = 0; a < npts; ++a)
        for (int b = 0; b < npts; ++b) fvals(a, b) = f(coord[a], coord[b]);

    Eigen::MatrixXd sines(max_idx + 1, npts);
    for (int m = 1; m <= max_idx; ++m)
        for (int a = 0; a < npts; ++a)
            sines(m, a) = std::sin(m * kPi * coord[a]) * wt[a];

    for (int i = 0; i < basis->count(); ++i) {
        const auto [m, n] = basis->modes2d[i];
        out.coeffs[i] = 2.0 * (sines.row(m) * fvals * sines.row(n).transpose()).value();
    }
    return out;
}

SpectralFunction semigroup_apply(const SpectralFunction& u, double t) {
    if (!(t >= 0.0)) throw std::domain_error("semigroup_apply: t must be >= 0");
    SpectralFunction out = u;
    out.coeffs.array() *= (-t * u.basis->lambdas.array()).exp();
    return out;
}

SpectralFunction frac_power_apply(const SpectralFunction& u, double sigma) {
    if (!(sigma >= -1.0 && sigma <= 1.0))
        throw std::domain_error("frac_power_apply: sigma must lie in [-1, 1]");
    SpectralFunction out = u;
    out.coeffs.array() *= u.basis->lambdas.array().pow(sigma);
    return out;
}

double hr_norm(const SpectralFunction& u, double r) {
    if (!(r >= 0.0)) throw std::domain_error("hr_norm: r must be >= 0");
    return std::sqrt((u.basis->lambdas.array().pow(r) * u.coeffs.array().square()).sum());
}

double evaluate_at(const SpectralFunction& u, double x, double y) {
    double acc = 0.0;
    for (int i = 0; i < u.basis->count(); ++i)
        if (u.coeffs[i] != 0.0) acc += u.coeffs[i] * u.basis->eval(i, x, y);
    return acc;
}

Eigen::VectorXd evaluate(const SpectralFunction& u,
                         const Eigen::Ref<const Eigen::MatrixX2d>& points) {
    const ScalarField f = to_field(u);
    Eigen::VectorXd out(points.rows());
    for (Eigen::Index p = 0; p < points.rows(); ++p)
        out[p] = f(points(p, 0), points(p, 1));
    return out;
}

ScalarField to_field(const SpectralFunction& u) {
    auto basis = u.basis;
    if (basis->domain.kind == Domain::Kind::Interval) {
        Eigen::VectorXd coeffs = u.coeffs;
        return [basis, coeffs](double x, double) {
            double acc = 0.0;
            for (int i = 0; i < basis->count(); ++i)
                if (coeffs[i] != 0.0) acc += coeffs[i] * basis->eval(i, x);
            return acc;
        };
    }

    // Square: collect nonzero modes once, then synthesize from per-axis sine
    // tables at each call. Cost per call is O(max_index + nnz).
    struct Packed {
        std::vector<int> m, n;
        std::vector<double> c;
        int max_idx = 1;
    };
    auto packed = std::make_shared<Packed>();
    for (int i = 0; i < basis->count(); ++i) {
        if (u.coeffs[i] == 0.0) continue;
        const auto [m, n] = basis->modes2d[i];
        packed->m.push_back(m);
        packed->n.push_back(n);
        packed->c.push_back(u.coeffs[i]);
        packed->max_idx = std::max({packed->max_idx, m, n});
    }
    return [packed](double x, double y) {
        const int top = packed->max_idx;
        Eigen::VectorXd sx(top + 1), sy(top + 1);
        for (int m = 1; m <= top; ++m) {
            sx[m] = std::sin(m * kPi * x);
            sy[m] = std::sin(m * kPi * y);
        }
        double acc = 0.0;
        for (size_t i = 0; i < packed->c.size(); ++i)
            acc += packed->c[i] * sx[packed->m[i]] * sy[packed->n[i]];
        return 2.0 * acc;
    };
}

}  // namespace semifrac
