#include "semifrac/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "semifrac/gamma.hpp"

namespace semifrac {

namespace {

void validate_orders(double s, double r) {
    if (!(s > 0.0 && s < 1.0))
        throw std::domain_error("fractional power s must lie in (0, 1)");
    if (!(r > -2.0 * s && r <= 4.0 - 2.0 * s))
        throw std::domain_error("regularity index r must lie in (-2s, 4-2s]");
}

}  // namespace

RegularityMode classify_regularity(double s, double r) {
    validate_orders(s, r);
    if (r < 0.0) return RegularityMode::NegativeOrder;
    if (r <= 2.0 - 2.0 * s) return RegularityMode::PiecewiseConstant;
    if (r < 2.0) return RegularityMode::MixedFirstCell;
    return RegularityMode::PiecewiseLinear;
}

QuadratureSpec::QuadratureSpec(double s_, double r_, double dt_, double T_request)
    : s(s_), r(r_), dt(dt_) {
    validate_orders(s, r);
    if (!(dt > 0.0))
        throw std::domain_error("node spacing dt must be positive");
    if (!(T_request > 0.0))
        throw std::domain_error("truncation horizon must be positive");
    n_t = static_cast<int>(std::ceil(T_request / dt - 1e-12));
    if (n_t < 1) n_t = 1;
    T = n_t * dt;
    mode = classify_regularity(s, r);
}

WeightVector compute_weights(const QuadratureSpec& spec) {
    const int n = spec.n_t;
    const double s = spec.s;
    const double dts = std::pow(spec.dt, s);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(n + 1);

    // g(j) = j^{1+s}; second differences of g are the interior hat weights.
    auto g = [s](double j) { return std::pow(j, 1.0 + s); };

    switch (spec.mode) {
        case RegularityMode::PiecewiseConstant: {
            const double c = dts / s;
            for (int j = 0; j < n; ++j)
                beta[j] = c * (std::pow(j + 1.0, s) - std::pow(double(j), s));
            break;
        }
        case RegularityMode::NegativeOrder: {
            // First cell is dropped: the sample rho(t_0) may be unbounded.
            const double c = dts / s;
            for (int j = 1; j < n; ++j)
                beta[j] = c * (std::pow(j + 1.0, s) - std::pow(double(j), s));
            break;
        }
        case RegularityMode::MixedFirstCell: {
            const double c = dts / (s * (1.0 + s));
            if (n == 1) {
                // Single cell carries the constant value rho(t_1).
                beta[1] = dts / s;
                break;
            }
            beta[1] = c * (std::pow(2.0, 1.0 + s) - 1.0);
            for (int j = 2; j < n; ++j)
                beta[j] = c * (g(j + 1.0) - 2.0 * g(j) + g(j - 1.0));
            beta[n] = c * (g(n - 1.0) + (1.0 + s) * std::pow(double(n), s) - g(n));
            break;
        }
        case RegularityMode::PiecewiseLinear: {
            const double c = dts / (s * (1.0 + s));
            beta[0] = c;
            for (int j = 1; j < n; ++j)
                beta[j] = c * (g(j + 1.0) - 2.0 * g(j) + g(j - 1.0));
            beta[n] = c * (g(n - 1.0) + (1.0 + s) * std::pow(double(n), s) - g(n));
            break;
        }
    }
    return {std::move(beta), gamma_fn(s)};
}

std::pair<double, int> choose_truncation(double s, double r, double dt,
                                         double lambda_min, double safety) {
    validate_orders(s, r);
    if (!(dt > 0.0 && dt < 1.0))
        throw std::domain_error("choose_truncation: dt must lie in (0, 1)");
    if (!(lambda_min > 0.0))
        throw std::domain_error("choose_truncation: lambda_min must be positive");
    if (!(safety >= 1.0))
        throw std::domain_error("choose_truncation: safety factor must be >= 1");

    const double T_raw = safety * (0.5 * r + s) / lambda_min * std::log(1.0 / dt);
    int n_t = static_cast<int>(std::ceil(T_raw / dt - 1e-12));
    if (n_t < 1) n_t = 1;
    return {n_t * dt, n_t};
}

double apply_quadrature(const WeightVector& weights,
                        const Eigen::Ref<const Eigen::VectorXd>& samples) {
    if (samples.size() != weights.beta.size())
        throw std::invalid_argument("apply_quadrature: samples/weights length mismatch");
    return weights.beta.dot(samples) / weights.gamma_s;
}

double interpolant_eval(RegularityMode mode,
                        const Eigen::Ref<const Eigen::VectorXd>& samples,
                        double dt, double t) {
    const int n = static_cast<int>(samples.size()) - 1;
    if (n < 1) throw std::invalid_argument("interpolant_eval: need >= 2 samples");
    const double T = n * dt;
    if (!(t >= 0.0 && t < T))
        throw std::domain_error("interpolant_eval: t outside [0, T)");

    int j = static_cast<int>(std::floor(t / dt));
    if (j > n - 1) j = n - 1;  // guard against floor(t/dt) == n at roundoff

    switch (mode) {
        case RegularityMode::PiecewiseConstant:
            return samples[j];
        case RegularityMode::NegativeOrder:
            return j == 0 ? 0.0 : samples[j];
        case RegularityMode::MixedFirstCell:
            if (j == 0) return samples[1];
            [[fallthrough]];
        case RegularityMode::PiecewiseLinear: {
            const double w = (t - j * dt) / dt;
            return (1.0 - w) * samples[j] + w * samples[j + 1];
        }
    }
    return 0.0;  // unreachable
}

}  // namespace semifrac
