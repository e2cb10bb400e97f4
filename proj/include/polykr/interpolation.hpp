#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polykr/errors.hpp"
#include "polykr/legendre.hpp"
#include "polykr/multi_index.hpp"
#include "polykr/oracle.hpp"
#include "polykr/parallel.hpp"
#include "polykr/quadrature.hpp"
#include "polykr/surrogate.hpp"

namespace polykr::interp {

// Deterministic surrogate construction by Lagrange interpolation at
// Chebyshev-Gauss nodes: tensorized operators I_nu, sparse operators
// I_Lambda = sum c_{nu,Lambda} I_nu via the combination formula, and the
// dyadic mixed-regularity variant where tensor degrees scale as 2^{nu_i}.
// Every interpolant is re-expressed in the orthonormal Legendre basis by
// exact Gauss-Legendre quadrature (degree arithmetic: (deg+1)-point Gauss
// integrates the degree-2*deg products exactly).

// Chebyshev-Gauss nodes mapped to [0,1], ascending; degree 0 interpolates
// at the midpoint.
inline std::vector<double> chebyshev_nodes(int degree) {
    if (degree < 0) throw std::domain_error("chebyshev_nodes: negative degree");
    if (degree == 0) return {0.5};
    const int count = degree + 1;
    std::vector<double> nodes(count);
    const double pi = 3.14159265358979323846;
    for (int j = 0; j <= degree / 2; ++j) {
        // node for index j (descending cos), mirrored for exact symmetry
        const double c = std::cos((2.0 * j + 1.0) * pi / (2.0 * count));
        nodes[degree - j] = (1.0 + c) / 2.0;
        nodes[j] = (1.0 - c) / 2.0;
    }
    if (count % 2 == 1) nodes[degree / 2] = 0.5;
    return nodes;
}

// Barycentric Lagrange basis over a fixed node family. Weights are
// computed in log space so high degrees neither overflow nor underflow.
class Barycentric {
public:
    explicit Barycentric(std::vector<double> nodes) : nodes_(std::move(nodes)) {
        const std::size_t n = nodes_.size();
        weights_.resize(n);
        std::vector<double> log_w(n, 0.0);
        std::vector<double> sign(n, 1.0);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                if (i == j) continue;
                const double diff = nodes_[j] - nodes_[i];
                log_w[j] -= std::log(std::abs(diff));
                if (diff < 0) sign[j] = -sign[j];
            }
        }
        const double max_log = *std::max_element(log_w.begin(), log_w.end());
        for (std::size_t j = 0; j < n; ++j)
            weights_[j] = sign[j] * std::exp(log_w[j] - max_log);
    }

    const std::vector<double>& nodes() const { return nodes_; }

    // all ell_j(x)
    void basis(double x, std::span<double> out) const {
        const std::size_t n = nodes_.size();
        for (std::size_t j = 0; j < n; ++j) {
            if (x == nodes_[j]) {
                for (std::size_t i = 0; i < n; ++i) out[i] = (i == j) ? 1.0 : 0.0;
                return;
            }
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            out[j] = weights_[j] / (x - nodes_[j]);
            denom += out[j];
        }
        for (std::size_t j = 0; j < n; ++j) out[j] /= denom;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

// max_x sum_j |ell_j(x)| over a uniform grid; diagnostic for node quality.
inline double lebesgue_constant(int degree, int grid_points = 1001) {
    const Barycentric bary(chebyshev_nodes(degree));
    std::vector<double> basis(degree + 1);
    double worst = 0.0;
    for (int g = 0; g < grid_points; ++g) {
        const double x = static_cast<double>(g) / (grid_points - 1);
        bary.basis(x, basis);
        double sum = 0.0;
        for (double b : basis) sum += std::abs(b);
        worst = std::max(worst, sum);
    }
    return worst;
}

struct InterpolationPlan {
    enum class Mode { tensor, sparse_combination, sparse_mix };
    Mode mode = Mode::tensor;
    std::vector<int> degrees;  // tensor
    MultiIndexSet lambda;      // sparse-combination
    int level = 0;             // sparse-mix
    int dim = 0;               // sparse-mix
};

// c_{nu,Lambda} = sum_{e in {0,1}^d : nu+e in Lambda} (-1)^|e|, aligned
// with Lambda's row order. Telescoping makes them sum to 1.
inline std::vector<int> combination_coefficients(const MultiIndexSet& lambda) {
    const int d = lambda.dimension();
    std::vector<int> coeffs(lambda.size(), 0);
    std::vector<int> probe(d);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        const auto nu = lambda[i];
        int total = 0;
        for (unsigned mask = 0; mask < (1u << d); ++mask) {
            int parity = 1;
            for (int j = 0; j < d; ++j) {
                const int e = (mask >> j) & 1u;
                probe[j] = nu[j] + e;
                if (e) parity = -parity;
            }
            if (lambda.contains(probe)) total += parity;
        }
        coeffs[i] = total;
    }
    return coeffs;
}

namespace detail {

// values tensor is row-major with axis 0 slowest, matching the
// lexicographic enumeration of the full box.
inline void apply_axis_transform(std::vector<double>& data, std::span<const std::size_t> dims,
                                 int axis, const std::vector<double>& matrix) {
    const std::size_t n = dims[axis];
    std::size_t inner = 1;
    for (std::size_t j = axis + 1; j < dims.size(); ++j) inner *= dims[j];
    std::size_t outer = 1;
    for (int j = 0; j < axis; ++j) outer *= dims[j];

    std::vector<double> slice(n);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            for (std::size_t r = 0; r < n; ++r) slice[r] = data[base + r * inner];
            for (std::size_t r = 0; r < n; ++r) {
                double sum = 0.0;
                for (std::size_t c = 0; c < n; ++c) sum += matrix[r * n + c] * slice[c];
                data[base + r * inner] = sum;
            }
        }
    }
}

// Per-axis map from nodal values to Legendre coefficients:
//   T[mu][c] = sum_q w_q L_mu(g_q) ell_c(g_q)
// with a (deg+1)-point Gauss rule (exact for the degree-2*deg integrand).
inline std::vector<double> nodal_to_legendre(int degree) {
    const int n = degree + 1;
    const quad::Rule rule = quad::gauss_legendre(n);
    const Barycentric bary(chebyshev_nodes(degree));
    std::vector<double> matrix(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> lag(n);
    for (int q = 0; q < n; ++q) {
        const legendre::Eval le = legendre::eval_all(degree, rule.nodes[q]);
        bary.basis(rule.nodes[q], lag);
        for (int mu = 0; mu < n; ++mu)
            for (int c = 0; c < n; ++c)
                matrix[static_cast<std::size_t>(mu) * n + c] +=
                    rule.weights[q] * le.values[mu] * lag[c];
    }
    return matrix;
}

struct TensorTerm {
    MultiIndexSet box;
    std::vector<double> coeffs;
    long evaluations = 0;
};

template <class F>
TensorTerm tensor_term(F&& f, std::span<const int> degrees) {
    const int d = static_cast<int>(degrees.size());
    std::vector<std::size_t> dims(d);
    std::size_t total = 1;
    for (int j = 0; j < d; ++j) {
        if (degrees[j] < 0) throw std::invalid_argument("tensor interpolation: negative degree");
        dims[j] = static_cast<std::size_t>(degrees[j]) + 1;
        total *= dims[j];
    }
    std::vector<std::vector<double>> nodes(d);
    for (int j = 0; j < d; ++j) nodes[j] = chebyshev_nodes(degrees[j]);

    std::vector<double> data(total);
    par::parallel_for_chunks(total, [&](std::size_t begin, std::size_t end) {
        std::vector<double> point(d);
        for (std::size_t flat = begin; flat < end; ++flat) {
            std::size_t rest = flat;
            for (int j = d - 1; j >= 0; --j) {
                point[j] = nodes[j][rest % dims[j]];
                rest /= dims[j];
            }
            data[flat] = f(std::span<const double>(point));
        }
    });

    for (int j = 0; j < d; ++j) {
        const auto matrix = nodal_to_legendre(degrees[j]);
        apply_axis_transform(data, dims, j, matrix);
    }

    TensorTerm term;
    term.box = full_box(degrees);
    term.coeffs = std::move(data);
    term.evaluations = static_cast<long>(total);
    return term;
}

}  // namespace detail

// The unique polynomial in the tensor space matching f on the Chebyshev
// grid, as Legendre coefficients over the full box {mu : mu_j <= nu_j}.
inline PolynomialSurrogate tensor_interpolate(
    const std::function<double(std::span<const double>)>& f, std::span<const int> degrees) {
    auto term = detail::tensor_term(f, degrees);
    FitInfo info;
    info.method = "interp-tensor";
    info.evaluations = term.evaluations;
    return PolynomialSurrogate(std::move(term.box), std::move(term.coeffs), std::move(info));
}

// sum_nu c_{nu,Lambda} I_nu[f] for modes sparse-combination and sparse-mix,
// or the plain tensor operator. Chebyshev-Gauss nodes are non-nested, so
// evaluation counts are summed per term without deduplication.
inline PolynomialSurrogate sparse_interpolate(
    const std::function<double(std::span<const double>)>& f, const InterpolationPlan& plan) {
    using Mode = InterpolationPlan::Mode;
    if (plan.mode == Mode::tensor) return tensor_interpolate(f, plan.degrees);

    MultiIndexSet combination_set;
    std::vector<std::vector<int>> term_degrees;
    std::vector<int> term_weight;
    std::string method;

    if (plan.mode == Mode::sparse_combination) {
        if (!is_downward_closed(plan.lambda))
            throw std::invalid_argument("sparse_interpolate: set is not downward closed");
        combination_set = plan.lambda;
        const auto coeffs = combination_coefficients(combination_set);
        for (std::size_t i = 0; i < combination_set.size(); ++i) {
            if (coeffs[i] == 0) continue;
            const auto nu = combination_set[i];
            term_degrees.emplace_back(nu.begin(), nu.end());
            term_weight.push_back(coeffs[i]);
        }
        method = "interp-sparse";
    } else {
        if (plan.dim < 1) throw std::invalid_argument("sparse_interpolate: missing dimension");
        if (plan.level < 0) throw std::invalid_argument("sparse_interpolate: negative level");
        combination_set = total_degree_set(plan.dim, plan.level);
        const auto coeffs = combination_coefficients(combination_set);
        for (std::size_t i = 0; i < combination_set.size(); ++i) {
            if (coeffs[i] == 0) continue;
            const auto w = combination_set[i];
            std::vector<int> degs(w.size());
            for (std::size_t j = 0; j < w.size(); ++j) degs[j] = 1 << w[j];
            term_degrees.push_back(std::move(degs));
            term_weight.push_back(coeffs[i]);
        }
        method = "interp-mix";
    }

    // output set: union of the active tensor boxes (downward closed)
    MultiIndexSet out_set;
    if (plan.mode == Mode::sparse_combination) {
        out_set = combination_set;
    } else {
        std::vector<std::vector<int>> rows;
        for (const auto& degs : term_degrees) {
            const MultiIndexSet box = full_box(degs);
            for (std::size_t i = 0; i < box.size(); ++i)
                rows.emplace_back(box[i].begin(), box[i].end());
        }
        out_set = MultiIndexSet::from_rows(plan.dim, std::move(rows));
    }

    std::vector<double> out(out_set.size(), 0.0);
    long evaluations = 0;
    for (std::size_t t = 0; t < term_degrees.size(); ++t) {
        auto term = detail::tensor_term(f, term_degrees[t]);
        evaluations += term.evaluations;
        const double w = term_weight[t];
        for (std::size_t i = 0; i < term.box.size(); ++i) {
            const auto pos = out_set.find(term.box[i]);
            out[static_cast<std::size_t>(pos)] += w * term.coeffs[i];
        }
    }

    FitInfo info;
    info.method = method;
    info.evaluations = evaluations;
    return PolynomialSurrogate(std::move(out_set), std::move(out), std::move(info));
}

// Density front end: interpolates sqrt(f_hat). Tiny negative oracle values
// are clamped to zero; genuinely negative ones are rejected.
inline PolynomialSurrogate fit(const DensityOracle& oracle, const InterpolationPlan& plan) {
    auto sqrt_target = [&oracle](std::span<const double> x) {
        const double value = oracle(x);
        if (!(value >= -1e-12))
            throw numeric_error("interp::fit: density oracle returned a negative value");
        return std::sqrt(std::max(value, 0.0));
    };
    return sparse_interpolate(sqrt_target, plan);
}

}  // namespace polykr::interp
