#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "polykr/oracle.hpp"
#include "polykr/quadrature.hpp"
#include "polykr/rng.hpp"
#include "polykr/surrogate.hpp"

namespace polykr::targets {

// Built-in density oracles. All are immutable after construction and safe
// for concurrent evaluation.

class UniformTarget final : public DensityOracle {
public:
    explicit UniformTarget(int dim) : dim_(dim) {
        if (dim < 1) throw std::invalid_argument("UniformTarget: bad dimension");
    }
    int dimension() const override { return dim_; }

private:
    double density(std::span<const double>) const override { return 1.0; }
    int dim_;
};

// f_hat = g^2 for a planted surrogate; used to exercise exact recovery.
class PlantedSquareTarget final : public DensityOracle {
public:
    explicit PlantedSquareTarget(PolynomialSurrogate g) : g_(std::move(g)) {}
    int dimension() const override { return g_.dimension(); }
    const PolynomialSurrogate& planted() const { return g_; }

private:
    double density(std::span<const double> x) const override {
        const double v = g_(x);
        return v * v;
    }
    PolynomialSurrogate g_;
};

// Three-mode sum of rotated-and-shifted Rosenbrock bumps on [0,1]^2:
//   f_hat(x) = sum_j exp(-r_{a,b}(t_{s,theta_j,c_j}(x))),
//   r_{a,b}(u,v) = (a-u)^2 + b (v-u^2)^2.
// The sign between the two squares is switchable; with a minus the density
// is unbounded along the parabola, so plus is the default.
struct RosenbrockMode {
    double theta = 0.0;
    std::array<double, 2> center{0.5, 0.5};
};

struct RosenbrockParams {
    double a = 0.4;
    double b = 4.0;
    double s = 7.0;
    bool plus_sign = true;
    std::vector<RosenbrockMode> modes{
        {6.147, {0.437, 0.606}},
        {4.052, {0.414, 0.347}},
        {1.96, {0.649, 0.457}},
    };
};

class RosenbrockTarget final : public DensityOracle {
public:
    explicit RosenbrockTarget(RosenbrockParams params = {}) : params_(std::move(params)) {
        if (params_.modes.empty())
            throw std::invalid_argument("RosenbrockTarget: needs at least one mode");
    }

    int dimension() const override { return 2; }
    const RosenbrockParams& params() const { return params_; }

private:
    double density(std::span<const double> x) const override {
        double total = 0.0;
        for (const auto& mode : params_.modes) {
            const double dx = x[0] - mode.center[0];
            const double dy = x[1] - mode.center[1];
            const double c = std::cos(mode.theta);
            const double s = std::sin(mode.theta);
            const double u = params_.s * (c * dx - s * dy);
            const double v = params_.s * (s * dx + c * dy);
            const double bend = (v - u * u) * (v - u * u);
            const double r = (params_.a - u) * (params_.a - u) +
                             (params_.plus_sign ? params_.b * bend : -params_.b * bend);
            total += std::exp(-r);
        }
        return total;
    }

    RosenbrockParams params_;
};

// Bayesian deconvolution posterior. A signal on [-1,1] is parametrized in
// a hat-function basis psi_{l,i} (support width 2^{1-l}, peak 2^{-alpha l}),
// convolved with a Gaussian kernel and observed at fixed points under
// additive Gaussian noise. The forward map is linear, F(x) = A x, with A
// precomputed by per-piece Gauss quadrature; the unnormalized posterior is
//   f_hat(x) = exp(-1/2 ||m - A x||^2 / sigma^2),  x in [-1,1]^d,
// pulled back to [0,1]^d by the affine map u -> 2u - 1.
struct DeconvolutionSpec {
    int max_level = 3;         // hat levels 0..max_level, d = 2^(max_level+1) - 1
    double alpha = 2.0;        // basis decay
    double sigma = 0.05;       // noise scale
    int measurements = 10;     // chi_j = (2j+1)/n - 1
    double kernel_decay = 10.0;  // k(y) = exp(-kernel_decay * y^2)
    int quad_points_per_piece = 32;
};

struct HatFunction {
    int level = 0;
    int offset = 0;
    double decay = 2.0;

    double support_begin() const {  // in y
        return -1.0 + offset * std::pow(2.0, 1.0 - level);
    }
    double support_mid() const {
        return -1.0 + (offset + 0.5) * std::pow(2.0, 1.0 - level);
    }
    double support_end() const {
        return -1.0 + (offset + 1.0) * std::pow(2.0, 1.0 - level);
    }

    double operator()(double y) const {
        const double shifted = y + 1.0;
        const double scale = std::pow(2.0, static_cast<double>(level));
        const double lo = offset / (scale / 2.0);
        const double mid = (offset + 0.5) / (scale / 2.0);
        const double hi = (offset + 1.0) / (scale / 2.0);
        const double amplitude = std::pow(2.0, -decay * level);
        if (shifted >= lo && shifted < mid) return amplitude * scale * (shifted - lo);
        if (shifted >= mid && shifted <= hi) return amplitude * scale * (hi - shifted);
        return 0.0;
    }
};

class DeconvolutionTarget final : public DensityOracle {
public:
    static DeconvolutionTarget build(const DeconvolutionSpec& spec, RngStream& rng) {
        if (spec.max_level < 0) throw std::invalid_argument("deconvolution: bad max level");
        if (!(spec.sigma > 0.0)) throw std::invalid_argument("deconvolution: sigma must be positive");
        if (spec.measurements < 1) throw std::invalid_argument("deconvolution: need measurements");

        DeconvolutionTarget t;
        t.spec_ = spec;
        for (int level = 0; level <= spec.max_level; ++level)
            for (int offset = 0; offset < (1 << level); ++offset)
                t.basis_.push_back({level, offset, spec.alpha});
        t.d_ = static_cast<int>(t.basis_.size());

        t.points_.resize(spec.measurements);
        for (int j = 1; j <= spec.measurements; ++j)
            t.points_[j - 1] = (2.0 * j + 1.0) / spec.measurements - 1.0;

        // A[j][col] = integral psi_col(y) k(chi_j - y) dy, per linear piece
        const quad::Rule rule = quad::gauss_legendre(spec.quad_points_per_piece);
        t.forward_.assign(static_cast<std::size_t>(spec.measurements) * t.d_, 0.0);
        for (int col = 0; col < t.d_; ++col) {
            const HatFunction& hat = t.basis_[col];
            const double pieces[3] = {hat.support_begin(), hat.support_mid(),
                                      hat.support_end()};
            for (int j = 0; j < spec.measurements; ++j) {
                double entry = 0.0;
                for (int piece = 0; piece < 2; ++piece) {
                    const double a = pieces[piece], b = pieces[piece + 1];
                    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                        const double y = a + (b - a) * rule.nodes[q];
                        const double diff = t.points_[j] - y;
                        entry += (b - a) * rule.weights[q] * hat(y) *
                                 std::exp(-spec.kernel_decay * diff * diff);
                    }
                }
                t.forward_[static_cast<std::size_t>(j) * t.d_ + col] = entry;
            }
        }

        // synthetic ground truth and noisy data
        t.x_star_.resize(t.d_);
        for (int i = 0; i < t.d_; ++i) t.x_star_[i] = 2.0 * rng.uniform() - 1.0;
        t.data_ = t.apply_forward(t.x_star_);
        t.noise_.resize(spec.measurements);
        for (int j = 0; j < spec.measurements; ++j) {
            t.noise_[j] = spec.sigma * rng.gaussian();
            t.data_[j] += t.noise_[j];
        }
        return t;
    }

    int dimension() const override { return d_; }
    const DeconvolutionSpec& spec() const { return spec_; }
    const std::vector<double>& measurement_points() const { return points_; }
    const std::vector<double>& data() const { return data_; }
    const std::vector<double>& ground_truth() const { return x_star_; }
    const std::vector<double>& noise() const { return noise_; }
    void set_data(std::vector<double> m) { data_ = std::move(m); }

    double forward_entry(int measurement, int col) const {
        return forward_[static_cast<std::size_t>(measurement) * d_ + col];
    }

    std::vector<double> apply_forward(std::span<const double> x) const {
        std::vector<double> out(spec_.measurements, 0.0);
        for (int j = 0; j < spec_.measurements; ++j) {
            double sum = 0.0;
            for (int i = 0; i < d_; ++i)
                sum += forward_[static_cast<std::size_t>(j) * d_ + i] * x[i];
            out[j] = sum;
        }
        return out;
    }

    // decreasing contribution of the finer hats; matches the paper's
    // anisotropy k_i = ceil(log2(i+1))
    std::vector<double> anisotropic_weights() const {
        std::vector<double> k(d_);
        for (int i = 1; i <= d_; ++i)
            k[i - 1] = std::ceil(std::log2(static_cast<double>(i) + 1.0));
        return k;
    }

private:
    double density(std::span<const double> u) const override {
        double quadratic = 0.0;
        for (int j = 0; j < spec_.measurements; ++j) {
            double predicted = 0.0;
            for (int i = 0; i < d_; ++i)
                predicted += forward_[static_cast<std::size_t>(j) * d_ + i] *
                             (2.0 * u[i] - 1.0);
            const double resid = data_[j] - predicted;
            quadratic += resid * resid;
        }
        return std::exp(-0.5 * quadratic / (spec_.sigma * spec_.sigma));
    }

    DeconvolutionSpec spec_;
    int d_ = 0;
    std::vector<HatFunction> basis_;
    std::vector<double> points_;
    std::vector<double> forward_;  // measurements x d, row-major
    std::vector<double> data_;
    std::vector<double> x_star_;
    std::vector<double> noise_;
};

}  // namespace polykr::targets
