#pragma once

// Shared test oracles. Everything here is independent of the library code
// paths it checks: its own Gauss rule (Newton on the classical recurrence),
// shifted-Legendre monomial forms, the naive double-sum transport
// evaluator, brute-force index enumeration, and basic statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "polykr/legendre.hpp"
#include "polykr/multi_index.hpp"
#include "polykr/rng.hpp"
#include "polykr/surrogate.hpp"

namespace testsupport {

struct GaussRule {
    std::vector<double> nodes;    // on [-1,1]
    std::vector<double> weights;  // sum to 2
};

inline GaussRule gauss_rule_sym(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 200; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-16) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

// integral_a^b f(t) dt with an n-point Gauss rule
template <class F>
double gauss_integral(F&& f, double a, double b, int n) {
    const GaussRule rule = gauss_rule_sym(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
        sum += 0.5 * (b - a) * rule.weights[i] * f(t);
    }
    return sum;
}

// Shifted Legendre on [0,1] in monomial form via
//   P~_n(x) = sum_k (-1)^{n+k} C(n,k) C(n+k,k) x^k,  L_n = sqrt(2n+1) P~_n.
inline double shifted_legendre_monomial(int n, double x) {
    auto binom = [](int a, int b) {
        double r = 1.0;
        for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
        return r;
    };
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double sign = ((n + k) % 2 == 0) ? 1.0 : -1.0;
        sum += sign * binom(n, k) * binom(n + k, k) * std::pow(x, k);
    }
    return std::sqrt(2.0 * n + 1.0) * sum;
}

// All multi-indices in the box {0..bound}^d with nu . k < level.
inline std::vector<std::vector<int>> brute_force_anisotropic(const std::vector<double>& k,
                                                             double level, int bound) {
    const int d = static_cast<int>(k.size());
    std::vector<std::vector<int>> out;
    std::vector<int> nu(d, 0);
    while (true) {
        double dot = 0.0;
        for (int j = 0; j < d; ++j) dot += nu[j] * k[j];
        if (dot < level) out.push_back(nu);
        int j = d - 1;
        for (; j >= 0; --j) {
            if (nu[j] < bound) {
                ++nu[j];
                break;
            }
            nu[j] = 0;
        }
        if (j < 0) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Random downward-closed set grown from {0} by adding admissible indices.
inline polykr::MultiIndexSet random_downward_closed(int dim, std::size_t target_size,
                                                    polykr::RngStream& rng) {
    std::vector<std::vector<int>> rows{std::vector<int>(dim, 0)};
    auto admissible = [&](const std::vector<int>& nu) {
        for (int j = 0; j < dim; ++j) {
            if (nu[j] == 0) continue;
            auto pred = nu;
            --pred[j];
            if (std::find(rows.begin(), rows.end(), pred) == rows.end()) return false;
        }
        return true;
    };
    while (rows.size() < target_size) {
        std::vector<std::vector<int>> frontier;
        for (const auto& row : rows) {
            for (int j = 0; j < dim; ++j) {
                auto next = row;
                ++next[j];
                if (std::find(rows.begin(), rows.end(), next) != rows.end()) continue;
                if (admissible(next)) frontier.push_back(next);
            }
        }
        std::sort(frontier.begin(), frontier.end());
        frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
        if (frontier.empty()) break;
        rows.push_back(frontier[static_cast<std::size_t>(rng.uniform() * frontier.size())]);
    }
    return polykr::MultiIndexSet::from_rows(dim, std::move(rows));
}

// Strictly positive surrogate: 1 + bounded perturbation. The perturbation
// scale keeps min g on a verification grid above `floor`.
inline polykr::PolynomialSurrogate random_positive_surrogate(int dim, std::size_t size,
                                                             polykr::RngStream& rng,
                                                             double floor = 0.2) {
    const polykr::MultiIndexSet lambda = random_downward_closed(dim, size, rng);
    std::vector<double> coeffs(lambda.size());
    double scale = 1.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) coeffs[i] = 2.0 * rng.uniform() - 1.0;
    const auto zero_pos = lambda.find(std::vector<int>(dim, 0));
    for (int attempt = 0; attempt < 60; ++attempt) {
        std::vector<double> trial = coeffs;
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] *= scale;
        trial[static_cast<std::size_t>(zero_pos)] = 1.0;
        polykr::PolynomialSurrogate g(lambda, trial);
        double min_g = 1e300;
        const int grid = dim == 1 ? 201 : (dim == 2 ? 41 : 17);
        std::vector<double> x(dim);
        std::vector<int> ticks(dim, 0);
        while (true) {
            for (int j = 0; j < dim; ++j) x[j] = static_cast<double>(ticks[j]) / (grid - 1);
            min_g = std::min(min_g, g(x));
            int j = dim - 1;
            for (; j >= 0; --j) {
                if (ticks[j] < grid - 1) {
                    ++ticks[j];
                    break;
                }
                ticks[j] = 0;
            }
            if (j < 0) break;
        }
        if (min_g >= floor) return g;
        scale *= 0.5;
    }
    throw std::runtime_error("random_positive_surrogate: could not reach the floor");
}

// Naive O(|Lambda|^2 d) transport components, straight from the double-sum
//   r_j = sum_{nu,mu} c_nu c_mu prod_{i<j} L L * I_{nu_j mu_j}(x_j)
//                                        * prod_{i>j} I_{nu_i mu_i}(1),
//   s_{j-1} analogous with the antiderivative at 1 from index j on. The
//   identity fallback mirrors the construction; no tail partition, no
//   gamma reuse.
inline std::vector<double> naive_transport_S(const polykr::PolynomialSurrogate& g,
                                             std::span<const double> x) {
    namespace leg = polykr::legendre;
    const auto& lambda = g.index_set();
    const auto c = g.coefficients();
    const int d = lambda.dimension();
    const std::size_t m = lambda.size();

    std::vector<leg::Eval> values(d);
    for (int j = 0; j < d; ++j) values[j] = leg::eval_all(lambda.max_degree(j), x[j]);

    auto r_term = [&](int j, std::size_t a, std::size_t b) {
        const auto nu = lambda[a];
        const auto mu = lambda[b];
        double term = c[a] * c[b];
        for (int i = 0; i < j; ++i)
            term *= values[i].values[nu[i]] * values[i].values[mu[i]];
        term *= leg::product_antiderivative(nu[j], mu[j], x[j]);
        for (int i = j + 1; i < d; ++i)
            term *= leg::product_antiderivative(nu[i], mu[i], 1.0);
        return term;
    };
    auto s_term = [&](int j, std::size_t a, std::size_t b) {
        // s_{j-1}: antiderivative at 1 from coordinate j onwards
        const auto nu = lambda[a];
        const auto mu = lambda[b];
        double term = c[a] * c[b];
        for (int i = 0; i < j; ++i)
            term *= values[i].values[nu[i]] * values[i].values[mu[i]];
        for (int i = j; i < d; ++i)
            term *= leg::product_antiderivative(nu[i], mu[i], 1.0);
        return term;
    };

    std::vector<double> out(d);
    for (int j = 0; j < d; ++j) {
        double r = 0.0, s_prev = 0.0;
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) {
                r += r_term(j, a, b);
                s_prev += s_term(j, a, b);
            }
        out[j] = s_prev > 0.0 ? std::clamp(r / s_prev, 0.0, 1.0) : x[j];
    }
    return out;
}

inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        worst = std::max(worst, std::abs((i + 1) / n - f));
        worst = std::max(worst, std::abs(f - i / n));
    }
    return worst;
}

}  // namespace testsupport
