#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polykr/errors.hpp"
#include "polykr/interpolation.hpp"
#include "polykr/multi_index.hpp"
#include "polykr/oracle.hpp"
#include "polykr/parallel.hpp"
#include "polykr/quadrature.hpp"
#include "polykr/rng.hpp"
#include "polykr/surrogate.hpp"
#include "polykr/transport.hpp"
#include "polykr/wls.hpp"

namespace polykr::metrics {

// Hellinger distance between the target and the surrogate pushforward,
//   d_H = || sqrt(f_hat/c_pi) - |g|/sqrt(c_g) ||_{L^2},
// estimated by tensor Gauss-Legendre quadrature in low dimension and plain
// Monte Carlo (with standard error) otherwise. |g| rather than g: the
// pushforward density is g^2/c_g, so negative excursions fold.

class QuadratureGrid {
public:
    enum class Mode { tensor, monte_carlo };

    static QuadratureGrid tensor(int dim, int points_per_axis) {
        if (dim < 1) throw std::invalid_argument("QuadratureGrid: bad dimension");
        if (points_per_axis < 1) throw std::invalid_argument("QuadratureGrid: bad point count");
        QuadratureGrid grid;
        grid.mode_ = Mode::tensor;
        grid.dim_ = dim;
        grid.rule_ = quad::gauss_legendre(points_per_axis);
        std::size_t total = 1;
        for (int j = 0; j < dim; ++j) total *= grid.rule_.nodes.size();
        grid.total_ = total;
        return grid;
    }

    static QuadratureGrid monte_carlo(int dim, std::size_t points, std::uint64_t seed) {
        if (dim < 1) throw std::invalid_argument("QuadratureGrid: bad dimension");
        if (points < 2) throw std::invalid_argument("QuadratureGrid: bad point count");
        QuadratureGrid grid;
        grid.mode_ = Mode::monte_carlo;
        grid.dim_ = dim;
        grid.total_ = points;
        grid.seed_ = seed;
        return grid;
    }

    Mode mode() const { return mode_; }
    int dimension() const { return dim_; }
    std::size_t total_points() const { return total_; }
    std::uint64_t seed() const { return seed_; }
    const quad::Rule& axis_rule() const { return rule_; }

    // Fills per-point values f(x_i); quadrature weight of point i is
    // weight(i). Both tensor and MC weights sum to 1.
    template <class F>
    void evaluate(F&& f, std::vector<double>& values) const {
        values.resize(total_);
        if (mode_ == Mode::tensor) {
            const std::size_t per_axis = rule_.nodes.size();
            par::parallel_for_chunks(total_, [&](std::size_t begin, std::size_t end) {
                std::vector<double> point(dim_);
                for (std::size_t flat = begin; flat < end; ++flat) {
                    std::size_t rest = flat;
                    for (int j = dim_ - 1; j >= 0; --j) {
                        point[j] = rule_.nodes[rest % per_axis];
                        rest /= per_axis;
                    }
                    values[flat] = f(std::span<const double>(point));
                }
            });
        } else {
            const RngStream root(seed_);
            par::parallel_for_chunks(total_, [&](std::size_t begin, std::size_t end) {
                std::vector<double> point(dim_);
                for (std::size_t i = begin; i < end; ++i) {
                    RngStream stream = root.substream(i);
                    for (int j = 0; j < dim_; ++j) point[j] = stream.uniform();
                    values[i] = f(std::span<const double>(point));
                }
            });
        }
    }

    double weight(std::size_t flat) const {
        if (mode_ == Mode::monte_carlo) return 1.0 / static_cast<double>(total_);
        const std::size_t per_axis = rule_.nodes.size();
        double w = 1.0;
        for (int j = 0; j < dim_; ++j) {
            w *= rule_.weights[flat % per_axis];
            flat /= per_axis;
        }
        return w;
    }

private:
    Mode mode_ = Mode::tensor;
    int dim_ = 0;
    std::size_t total_ = 0;
    std::uint64_t seed_ = 0;
    quad::Rule rule_;
};

inline double surrogate_mass(const PolynomialSurrogate& g) { return g.mass(); }

struct HellingerEstimate {
    double value = 0.0;
    std::optional<double> std_error;  // Monte Carlo mode only
};

namespace detail {

// Shared core: target values and "normalized-root pushforward" values are
// supplied per grid point; target normalization is estimated on the grid.
inline HellingerEstimate hellinger_from_values(const QuadratureGrid& grid,
                                               const std::vector<double>& target_values,
                                               const std::vector<double>& root_values,
                                               double root_normalization) {
    const std::size_t n = grid.total_points();
    double c_pi = 0.0;
    for (std::size_t i = 0; i < n; ++i) c_pi += grid.weight(i) * target_values[i];
    if (!(c_pi > 0.0))
        throw numeric_error("hellinger: target normalization estimate is not positive");

    const double inv_sqrt_cpi = 1.0 / std::sqrt(c_pi);
    const double inv_sqrt_cg = 1.0 / std::sqrt(root_normalization);
    double mean = 0.0;
    double second_moment = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = std::sqrt(std::max(target_values[i], 0.0)) * inv_sqrt_cpi -
                            std::abs(root_values[i]) * inv_sqrt_cg;
        const double h = diff * diff;
        mean += grid.weight(i) * h;
        second_moment += grid.weight(i) * h * h;
    }
    HellingerEstimate est;
    est.value = std::sqrt(std::max(mean, 0.0));
    if (grid.mode() == QuadratureGrid::Mode::monte_carlo) {
        const double variance = std::max(second_moment - mean * mean, 0.0);
        const double se_mean = std::sqrt(variance / static_cast<double>(n));
        const double floor = std::max(est.value, std::sqrt(se_mean));
        est.std_error = floor > 0.0 ? se_mean / (2.0 * floor) : 0.0;
    }
    return est;
}

}  // namespace detail

inline HellingerEstimate hellinger(const DensityOracle& target, const PolynomialSurrogate& g,
                                   const QuadratureGrid& grid) {
    if (target.dimension() != grid.dimension() || g.dimension() != grid.dimension())
        throw std::invalid_argument("hellinger: dimension mismatch");
    std::vector<double> target_values, g_values;
    grid.evaluate([&](std::span<const double> x) { return target(x); }, target_values);
    grid.evaluate([&](std::span<const double> x) { return g(x); }, g_values);
    return detail::hellinger_from_values(grid, target_values, g_values, g.mass());
}

// Testing overload: both densities as oracles (each normalized on the grid).
inline HellingerEstimate hellinger(const DensityOracle& f, const DensityOracle& h,
                                   const QuadratureGrid& grid) {
    if (f.dimension() != grid.dimension() || h.dimension() != grid.dimension())
        throw std::invalid_argument("hellinger: dimension mismatch");
    std::vector<double> fv, hv;
    grid.evaluate([&](std::span<const double> x) { return f(x); }, fv);
    grid.evaluate([&](std::span<const double> x) { return h(x); }, hv);
    double c_h = 0.0;
    for (std::size_t i = 0; i < grid.total_points(); ++i) c_h += grid.weight(i) * hv[i];
    if (!(c_h > 0.0))
        throw numeric_error("hellinger: second density normalization is not positive");
    std::vector<double> roots(hv.size());
    for (std::size_t i = 0; i < hv.size(); ++i) roots[i] = std::sqrt(std::max(hv[i], 0.0));
    return detail::hellinger_from_values(grid, fv, roots, c_h);
}

struct ConvergenceRow {
    std::size_t cardinality = 0;
    long evaluations = 0;
    bool failed = false;
    double hellinger = 0.0;
    std::optional<double> hellinger_se;
    std::string method;
    double seconds = 0.0;
};

using ConvergenceRecord = std::vector<ConvergenceRow>;

struct StudyOptions {
    std::vector<double> weights;  // anisotropic k
    std::vector<double> levels;   // strictly increasing
    std::string method = "wls";   // "wls" | "interp"
    wls::Options wls_options;
    std::size_t mc_points = 100000;  // used when dimension > 3
    int tensor_min_points = 64;
};

// One row per level: build Lambda, fit, build the transport, estimate the
// Hellinger distance, record density evaluations and wall time. A fit
// failure marks the row instead of aborting the study.
inline ConvergenceRecord convergence_study(const DensityOracle& target,
                                           const StudyOptions& options, RngStream& rng) {
    if (options.levels.empty()) throw std::invalid_argument("convergence_study: no levels");
    for (std::size_t i = 1; i < options.levels.size(); ++i)
        if (!(options.levels[i] > options.levels[i - 1]))
            throw std::invalid_argument("convergence_study: levels must be strictly increasing");
    if (options.method != "wls" && options.method != "interp")
        throw std::invalid_argument("convergence_study: unknown method");
    const int d = target.dimension();
    if (static_cast<int>(options.weights.size()) != d)
        throw std::invalid_argument("convergence_study: weight dimension mismatch");

    ConvergenceRecord record;
    for (std::size_t row_id = 0; row_id < options.levels.size(); ++row_id) {
        const auto t0 = std::chrono::steady_clock::now();
        const MultiIndexSet lambda =
            construct_anisotropic(options.weights, options.levels[row_id]);
        RngStream row_rng = rng.substream(row_id);

        ConvergenceRow row;
        row.cardinality = lambda.size();
        row.method = options.method;
        const long evals_before = target.evaluations();
        try {
            PolynomialSurrogate g;
            if (options.method == "wls") {
                g = wls::fit(target, lambda, row_rng, options.wls_options).first;
            } else {
                interp::InterpolationPlan plan;
                plan.mode = interp::InterpolationPlan::Mode::sparse_combination;
                plan.lambda = lambda;
                g = interp::fit(target, plan);
            }
            // the reported count covers the construction phase only, not
            // the diagnostic quadrature below
            row.evaluations = target.evaluations() - evals_before;
            const TriangularTransport transport(g);  // validates constructibility
            QuadratureGrid grid =
                d <= 3 ? QuadratureGrid::tensor(
                             d, std::max(options.tensor_min_points,
                                         2 * lambda.max_degree() + 1))
                       : QuadratureGrid::monte_carlo(d, options.mc_points,
                                                     row_rng.substream(0xC0FFEE).root_seed());
            const HellingerEstimate est = hellinger(target, g, grid);
            row.hellinger = est.value;
            row.hellinger_se = est.std_error;
        } catch (const fit_error&) {
            row.failed = true;
            row.evaluations = target.evaluations() - evals_before;
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        record.push_back(std::move(row));
    }
    return record;
}

}  // namespace polykr::metrics
