#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace polykr::quad {

// Gauss-Legendre rule mapped to [0,1] with weights summing to 1 (the
// uniform probability measure the Legendre basis is orthonormal against).
// Exact for polynomials of degree <= 2n-1.
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline Rule gauss_legendre(int n) {
    if (n < 1) throw std::domain_error("gauss_legendre: need at least one node");
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration on P_n over [-1,1] from the Chebyshev-like guess
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // roots come out in descending order; mirror to fill both ends
        rule.nodes[n - 1 - i] = (1.0 + x) / 2.0;
        rule.nodes[i] = (1.0 - x) / 2.0;
        rule.weights[n - 1 - i] = w / 2.0;
        rule.weights[i] = w / 2.0;
    }
    return rule;
}

// integral_0^1 f dx for a univariate f, n-point rule.
template <class F>
double integrate(F&& f, int n) {
    const Rule rule = gauss_legendre(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(rule.nodes[i]);
    return sum;
}

}  // namespace polykr::quad
