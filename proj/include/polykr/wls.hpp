#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "polykr/errors.hpp"
#include "polykr/legendre.hpp"
#include "polykr/multi_index.hpp"
#include "polykr/oracle.hpp"
#include "polykr/parallel.hpp"
#include "polykr/rng.hpp"
#include "polykr/surrogate.hpp"

namespace polykr::wls {

// Weighted least-squares fit of sqrt(f) in span{L_nu : nu in Lambda}.
// Points are drawn from the optimal mixture density
//   f_eta(x) = (1/m) sum_nu L_nu(x)^2,
// and the whole point set is redrawn until the weighted empirical Gramian
// satisfies ||G - I||_2 <= 1/2, which guarantees a well-conditioned solve.
// The density is evaluated exactly once per accepted point.

struct Options {
    std::optional<std::size_t> sample_count;  // default 10 m ceil(ln(4m))
    int max_rounds = 50;
};

struct Run {
    std::size_t n = 0;
    int dim = 0;
    std::vector<double> points;   // n x d, row-major
    std::vector<double> weights;  // 1 / f_eta(chi_k)
    double gramian_norm = 0.0;    // ||G - I||_2 on exit
    int rounds = 0;
};

inline std::size_t default_sample_count(std::size_t m) {
    return 10 * m *
           static_cast<std::size_t>(std::ceil(std::log(4.0 * static_cast<double>(m))));
}

namespace detail {

// x solving integral_0^x L_deg^2 = u, by bisection. The CDF is strictly
// increasing (L_deg^2 vanishes only at finitely many points).
inline double invert_coordinate_cdf(int deg, double u, legendre::Eval& scratch) {
    if (deg == 0) return u;  // CDF is the identity
    double lo = 0.0, hi = 1.0, x = 0.5;
    for (int iter = 0; iter < 48; ++iter) {
        legendre::eval_all_into(scratch, deg + 1, x);
        if (legendre::squared_antiderivative(scratch, deg) > u)
            hi = x;
        else
            lo = x;
        x = 0.5 * (lo + hi);
    }
    return x;
}

// Rows of B are the basis values (L_nu(x))_{nu in Lambda}.
inline void basis_row(const MultiIndexSet& lambda, std::span<const int> axis_degrees,
                      std::span<const double> x, std::vector<legendre::Eval>& tables,
                      double* out) {
    const int d = lambda.dimension();
    tables.resize(d);
    for (int j = 0; j < d; ++j)
        legendre::eval_all_into(tables[j], axis_degrees[j], x[j]);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        const auto nu = lambda[i];
        double v = 1.0;
        for (int j = 0; j < d; ++j) v *= tables[j].values[nu[j]];
        out[i] = v;
    }
}

inline std::vector<int> axis_degrees(const MultiIndexSet& lambda) {
    std::vector<int> degs(lambda.dimension());
    for (int j = 0; j < lambda.dimension(); ++j) degs[j] = lambda.max_degree(j);
    return degs;
}

inline double spectral_norm_minus_identity(const Eigen::MatrixXd& g) {
    Eigen::MatrixXd a = g;
    a.diagonal().array() -= 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a,
                                                          Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
}

}  // namespace detail

// One draw from the mixture: nu uniform in Lambda, then each coordinate
// with density L_{nu_j}^2 via inverse-CDF bisection.
inline std::vector<double> sample_optimal(const MultiIndexSet& lambda, RngStream& rng) {
    if (lambda.empty()) throw std::invalid_argument("sample_optimal: empty index set");
    const std::size_t m = lambda.size();
    const int d = lambda.dimension();
    std::size_t pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(m));
    if (pick >= m) pick = m - 1;
    const auto nu = lambda[pick];
    std::vector<double> x(d);
    legendre::Eval scratch;
    for (int j = 0; j < d; ++j)
        x[j] = detail::invert_coordinate_cdf(nu[j], rng.uniform(), scratch);
    return x;
}

// ||G - I||_2 for the weighted empirical Gramian of a given design.
inline double gramian_norm(std::span<const double> points, std::span<const double> weights,
                           const MultiIndexSet& lambda) {
    const int d = lambda.dimension();
    const std::size_t m = lambda.size();
    const std::size_t n = weights.size();
    if (points.size() != n * static_cast<std::size_t>(d))
        throw std::invalid_argument("gramian_norm: size mismatch");
    const auto degs = detail::axis_degrees(lambda);
    Eigen::MatrixXd b(n, m);
    par::parallel_for_chunks(n, [&](std::size_t begin, std::size_t end) {
        std::vector<legendre::Eval> tables;
        std::vector<double> row(m);
        for (std::size_t k = begin; k < end; ++k) {
            detail::basis_row(lambda, degs, points.subspan(k * d, d), tables, row.data());
            const double scale = std::sqrt(weights[k]);
            for (std::size_t i = 0; i < m; ++i) b(k, i) = scale * row[i];
        }
    });
    const Eigen::MatrixXd g = (b.transpose() * b) / static_cast<double>(n);
    return detail::spectral_norm_minus_identity(g);
}

inline std::pair<PolynomialSurrogate, Run> fit(const DensityOracle& oracle,
                                               const MultiIndexSet& lambda, RngStream& rng,
                                               const Options& options = {}) {
    if (lambda.empty()) throw std::invalid_argument("wls::fit: empty index set");
    const int d = lambda.dimension();
    if (oracle.dimension() != d)
        throw std::invalid_argument("wls::fit: oracle dimension mismatch");
    const std::size_t m = lambda.size();
    const std::size_t n = options.sample_count.value_or(default_sample_count(m));
    if (n < m) throw std::invalid_argument("wls::fit: fewer samples than basis functions");
    const auto degs = detail::axis_degrees(lambda);

    // one caller stream, split deterministically per (round, point)
    const std::uint64_t fit_root = rng.next();
    auto point_stream = [&](int round, std::size_t k) {
        return RngStream(polykr::detail::mix_seed(
            fit_root, (static_cast<std::uint64_t>(round) << 40) ^ k));
    };

    Run run;
    run.n = n;
    run.dim = d;
    run.points.resize(n * d);
    run.weights.resize(n);

    Eigen::MatrixXd scaled_basis(n, m);  // rows scaled by sqrt(weight)
    Eigen::MatrixXd gramian;
    double norm = 0.0;
    int round = 0;
    while (true) {
        ++round;
        if (round > options.max_rounds)
            throw fit_error("wls::fit: resampling budget exhausted, last ||G - I|| = " +
                                std::to_string(norm),
                            norm, round - 1);
        par::parallel_for_chunks(n, [&](std::size_t begin, std::size_t end) {
            std::vector<legendre::Eval> tables;
            legendre::Eval scratch;
            std::vector<double> row(m);
            for (std::size_t k = begin; k < end; ++k) {
                RngStream stream = point_stream(round, k);
                std::size_t pick =
                    static_cast<std::size_t>(stream.uniform() * static_cast<double>(m));
                if (pick >= m) pick = m - 1;
                const auto nu = lambda[pick];
                for (int j = 0; j < d; ++j)
                    run.points[k * d + j] =
                        detail::invert_coordinate_cdf(nu[j], stream.uniform(), scratch);
                detail::basis_row(lambda, degs, {run.points.data() + k * d, (std::size_t)d},
                                  tables, row.data());
                double f_eta = 0.0;
                for (std::size_t i = 0; i < m; ++i) f_eta += row[i] * row[i];
                f_eta /= static_cast<double>(m);
                run.weights[k] = 1.0 / f_eta;
                const double scale = std::sqrt(run.weights[k]);
                for (std::size_t i = 0; i < m; ++i) scaled_basis(k, i) = scale * row[i];
            }
        });
        gramian = (scaled_basis.transpose() * scaled_basis) / static_cast<double>(n);
        norm = detail::spectral_norm_minus_identity(gramian);
        if (norm <= 0.5) break;
    }
    run.gramian_norm = norm;
    run.rounds = round;

    // density evaluations: once, after the accepted point set
    Eigen::VectorXd rhs_samples(n);
    par::parallel_for_chunks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const double value =
                oracle(std::span<const double>(run.points.data() + k * d, d));
            if (!(value >= -1e-12))
                throw numeric_error("wls::fit: density oracle returned a negative value");
            // sqrt of the target; weight folded in, basis rows already carry sqrt(w)
            rhs_samples(k) = std::sqrt(std::max(value, 0.0)) * std::sqrt(run.weights[k]);
        }
    });
    const Eigen::VectorXd rhs = (scaled_basis.transpose() * rhs_samples) / static_cast<double>(n);
    const Eigen::VectorXd coeffs = gramian.ldlt().solve(rhs);

    FitInfo info;
    info.method = "wls";
    info.evaluations = static_cast<long>(n);
    info.rounds = round;
    std::vector<double> c(coeffs.data(), coeffs.data() + m);
    return {PolynomialSurrogate(lambda, std::move(c), std::move(info)), std::move(run)};
}

}  // namespace polykr::wls
