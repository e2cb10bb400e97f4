#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace polykr::legendre {

// Orthonormal Legendre basis on [0,1]:
//
//   L_n(x) = sqrt(2n+1) * P_n(2x-1),   integral_0^1 L_n L_k = delta_nk,
//
// with P_n the classical Legendre polynomial normalized by P_n(1) = 1.
// Values and first derivatives come from the three-term recursion applied
// at t = 2x-1 (the derivative picks up the chain-rule factor 2). Product
// antiderivatives integral_0^x L_n L_k have closed forms: a Wronskian-style
// expression off the diagonal and a three-term recursion on it.

struct Eval {
    int n_max = -1;
    double x = 0.0;
    std::vector<double> values;  // L_0(x) .. L_{n_max}(x)
    std::vector<double> derivs;  // L_0'(x) .. L_{n_max}'(x)
};

inline void check_point(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("legendre: point outside [0,1]");
}

// Fills an existing Eval; reusable storage for hot loops.
inline void eval_all_into(Eval& out, int n_max, double x) {
    if (n_max < 0) throw std::domain_error("legendre: negative degree");
    check_point(x);
    out.n_max = n_max;
    out.x = x;
    auto& v = out.values;
    auto& d = out.derivs;
    v.resize(static_cast<std::size_t>(n_max) + 1);
    d.resize(static_cast<std::size_t>(n_max) + 1);

    const double t = 2.0 * x - 1.0;
    v[0] = 1.0;
    d[0] = 0.0;
    if (n_max >= 1) {
        v[1] = t;
        d[1] = 1.0;
    }
    for (int n = 2; n <= n_max; ++n) {
        v[n] = ((2 * n - 1) * t * v[n - 1] - (n - 1) * v[n - 2]) / n;
        d[n] = ((2 * n - 1) * t * d[n - 1] - n * d[n - 2]) / (n - 1);
    }
    for (int n = 0; n <= n_max; ++n) {
        const double scale = std::sqrt(2.0 * n + 1.0);
        v[n] *= scale;
        d[n] *= 2.0 * scale;
    }
}

inline Eval eval_all(int n_max, double x) {
    Eval e;
    eval_all_into(e, n_max, x);
    return e;
}

// integral_0^x L_n L_k for n != k, given basis values at x with
// e.n_max >= max(n,k).
inline double product_antiderivative_offdiag(const Eval& e, int n, int k) {
    return (e.x - e.x * e.x) *
           (e.values[n] * e.derivs[k] - e.values[k] * e.derivs[n]) /
           (static_cast<double>(n + k + 1) * static_cast<double>(n - k));
}

// integral_0^x L_n^2 for a single n; requires e.n_max >= n+1. O(n).
inline double squared_antiderivative(const Eval& e, int n) {
    double current = e.x;  // integral of L_0^2
    if (n == 0) return current;
    const double u = 2.0 * e.x - 1.0;
    current = (u * u * u + 1.0) / 2.0;  // integral of L_1^2
    for (int j = 2; j <= n; ++j) {
        const double up = product_antiderivative_offdiag(e, j + 1, j - 1);
        const double down = product_antiderivative_offdiag(e, j, j - 2);
        current += up * ((j + 1) * std::sqrt(2.0 * j - 1.0)) /
                       (j * std::sqrt(2.0 * j + 3.0)) -
                   down * ((j - 1) * std::sqrt(2.0 * j + 1.0)) /
                       (j * std::sqrt(2.0 * j - 3.0));
    }
    return current;
}

// integral_0^x L_n(t) L_k(t) dt for any n, k >= 0 and x in [0,1].
inline double product_antiderivative(int n, int k, double x) {
    if (n < 0 || k < 0) throw std::domain_error("legendre: negative degree");
    check_point(x);
    if (n == k) {
        const Eval e = eval_all(n + 1, x);
        return squared_antiderivative(e, n);
    }
    const Eval e = eval_all(std::max(n, k), x);
    return product_antiderivative_offdiag(e, n, k);
}

// Full symmetric table (integral_0^x L_n L_k)_{n,k <= m}. One O(m) basis
// evaluation, O(1) per off-diagonal entry, O(m) for the diagonal recursion;
// the diagonal is filled last so its off-diagonal dependencies exist.
class ProductTable {
public:
    ProductTable() = default;
    ProductTable(int max_degree, double x) { assign(max_degree, x); }

    void assign(int max_degree, double x) {
        if (max_degree < 0) throw std::domain_error("legendre: negative degree");
        check_point(x);
        m_ = max_degree;
        x_ = x;
        const std::size_t side = static_cast<std::size_t>(m_) + 1;
        data_.resize(side * side);
        eval_all_into(eval_, m_ + 1, x);

        for (int n = 0; n <= m_; ++n)
            for (int k = 0; k < n; ++k) {
                const double v = product_antiderivative_offdiag(eval_, n, k);
                data_[static_cast<std::size_t>(n) * side + k] = v;
                data_[static_cast<std::size_t>(k) * side + n] = v;
            }

        double diag = x;
        data_[0] = diag;
        if (m_ >= 1) {
            const double u = 2.0 * x - 1.0;
            diag = (u * u * u + 1.0) / 2.0;
            data_[side + 1] = diag;
        }
        for (int j = 2; j <= m_; ++j) {
            const double up = product_antiderivative_offdiag(eval_, j + 1, j - 1);
            const double down = product_antiderivative_offdiag(eval_, j, j - 2);
            diag += up * ((j + 1) * std::sqrt(2.0 * j - 1.0)) /
                        (j * std::sqrt(2.0 * j + 3.0)) -
                    down * ((j - 1) * std::sqrt(2.0 * j + 1.0)) /
                        (j * std::sqrt(2.0 * j - 3.0));
            data_[static_cast<std::size_t>(j) * side + j] = diag;
        }
    }

    double operator()(int n, int k) const {
        return data_[static_cast<std::size_t>(n) * (m_ + 1) + k];
    }

    int max_degree() const { return m_; }
    double point() const { return x_; }
    // Basis values at the table's point (degrees 0..max_degree+1).
    const Eval& basis() const { return eval_; }

private:
    int m_ = -1;
    double x_ = 0.0;
    std::vector<double> data_;
    Eval eval_;
};

inline std::vector<std::vector<double>> product_antiderivative_table(int m, double x) {
    ProductTable t(m, x);
    std::vector<std::vector<double>> out(m + 1, std::vector<double>(m + 1));
    for (int n = 0; n <= m; ++n)
        for (int k = 0; k <= m; ++k) out[n][k] = t(n, k);
    return out;
}

}  // namespace polykr::legendre
