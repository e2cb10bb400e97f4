#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polykr/legendre.hpp"
#include "polykr/multi_index.hpp"

namespace polykr {

struct FitInfo {
    std::string method;          // "wls", "interp-tensor", ...
    long evaluations = 0;        // density evaluations consumed by the fit
    int rounds = 0;              // resampling rounds (least-squares only)
    std::optional<std::uint64_t> seed;
};

// g(x) = sum_{nu in Lambda} c_nu L_nu(x) over the orthonormal Legendre
// basis on [0,1]^d. g^2 is the unnormalized density surrogate; by
// orthonormality integral g^2 = sum c_nu^2.
class PolynomialSurrogate {
public:
    PolynomialSurrogate() = default;

    PolynomialSurrogate(MultiIndexSet basis, std::vector<double> coeffs, FitInfo info = {})
        : basis_(std::move(basis)), coeffs_(std::move(coeffs)), info_(std::move(info)) {
        if (basis_.empty()) throw std::invalid_argument("PolynomialSurrogate: empty index set");
        if (coeffs_.size() != basis_.size())
            throw std::invalid_argument("PolynomialSurrogate: coefficient count mismatch");
        max_degree_.resize(basis_.dimension());
        for (int j = 0; j < basis_.dimension(); ++j)
            max_degree_[j] = basis_.max_degree(j);
    }

    int dimension() const { return basis_.dimension(); }
    std::size_t size() const { return basis_.size(); }
    const MultiIndexSet& index_set() const { return basis_; }
    std::span<const double> coefficients() const { return coeffs_; }
    const FitInfo& info() const { return info_; }
    FitInfo& info() { return info_; }
    std::span<const int> axis_degrees() const { return max_degree_; }

    double mass() const {
        double total = 0.0;
        for (double c : coeffs_) total += c * c;
        return total;
    }

    double operator()(std::span<const double> x) const {
        check_input(x);
        thread_local std::vector<legendre::Eval> tables;
        fill_tables(tables, x);
        double sum = 0.0;
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            const auto nu = basis_[i];
            double term = coeffs_[i];
            for (int j = 0; j < basis_.dimension(); ++j)
                term *= tables[j].values[nu[j]];
            sum += term;
        }
        return sum;
    }

    // d/dx_axis of g
    double partial_derivative(int axis, std::span<const double> x) const {
        check_input(x);
        if (axis < 0 || axis >= basis_.dimension())
            throw std::invalid_argument("PolynomialSurrogate: axis out of range");
        thread_local std::vector<legendre::Eval> tables;
        fill_tables(tables, x);
        double sum = 0.0;
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            const auto nu = basis_[i];
            double term = coeffs_[i];
            for (int j = 0; j < basis_.dimension(); ++j)
                term *= (j == axis) ? tables[j].derivs[nu[j]] : tables[j].values[nu[j]];
            sum += term;
        }
        return sum;
    }

private:
    void check_input(std::span<const double> x) const {
        if (basis_.empty()) throw std::logic_error("PolynomialSurrogate: not initialized");
        if (static_cast<int>(x.size()) != basis_.dimension())
            throw std::invalid_argument("PolynomialSurrogate: dimension mismatch");
    }

    void fill_tables(std::vector<legendre::Eval>& tables, std::span<const double> x) const {
        tables.resize(basis_.dimension());
        for (int j = 0; j < basis_.dimension(); ++j)
            legendre::eval_all_into(tables[j], max_degree_[j], x[j]);
    }

    MultiIndexSet basis_;
    std::vector<double> coeffs_;
    FitInfo info_;
    std::vector<int> max_degree_;
};

}  // namespace polykr
