#include "semifrac/gauss.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace semifrac {

GaussRule gauss_legendre(int n) {
    if (n < 1) throw std::domain_error("gauss_legendre: need n >= 1");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int cells, int points_per_cell) {
    const GaussRule rule = gauss_legendre(points_per_cell);
    const double h = (b - a) / cells;
    double sum = 0.0;
    for (int c = 0; c < cells; ++c) {
        const double mid = a + (c + 0.5) * h;
        double cell = 0.0;
        for (int q = 0; q < points_per_cell; ++q)
            cell += rule.weights[q] * f(mid + 0.5 * h * rule.nodes[q]);
        sum += cell * 0.5 * h;
    }
    return sum;
}

const TriangleRule& triangle_rule_deg4() {
    static const TriangleRule rule = [] {
        TriangleRule r;
        const double a1 = 0.445948490915965, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, w2 = 0.109951743655322;
        r.bary << a1, a1, 1 - 2 * a1,
                  a1, 1 - 2 * a1, a1,
                  1 - 2 * a1, a1, a1,
                  a2, a2, 1 - 2 * a2,
                  a2, 1 - 2 * a2, a2,
                  1 - 2 * a2, a2, a2;
        r.weights << w1, w1, w1, w2, w2, w2;
        return r;
    }();
    return rule;
}

}  // namespace semifrac
