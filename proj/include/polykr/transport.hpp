#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "polykr/errors.hpp"
#include "polykr/legendre.hpp"
#include "polykr/multi_index.hpp"
#include "polykr/parallel.hpp"
#include "polykr/rng.hpp"
#include "polykr/surrogate.hpp"

namespace polykr {

// Exact Knothe-Rosenblatt inverse map S for the squared surrogate density
// g^2, evaluated via the gamma recursion over the tail partition:
//
//   r_j  = sum over tail groups of gamma gamma^T-weighted product
//          antiderivatives at x_j,
//   s_j  = sum of squared updated gammas,
//   S_j  = r_j / s_{j-1},
//
// with the identity fallback S_j = x_j whenever the conditional mass
// s_{j-1} degenerates (g^2 vanishes on the slice up to rounding). The map
// T = S^{-1} is computed componentwise by bisection; probes at a frozen
// head only redo the work of one dimension.

struct SmoothnessHint {
    double k = 1.0;
    double alpha = 0.0;
};

// Bisection depth matching the surrogate accuracy when a smoothness hint
// is available, FP-limited depth otherwise.
inline int default_bisection_iters(const std::optional<SmoothnessHint>& hint,
                                   std::size_t cardinality, int dim) {
    if (!hint) return 48;
    const double r = (hint->k + hint->alpha) / static_cast<double>(dim) *
                     std::log(static_cast<double>(cardinality)) / std::log(2.0);
    return std::max(1, static_cast<int>(std::ceil(r)));
}

class TriangularTransport;

// Caller-owned scratch: gamma values per tail level plus Legendre scratch.
// One workspace per thread; the transport itself stays immutable.
class TransportWorkspace {
public:
    int axes_advanced() const { return advanced_; }

private:
    friend class TriangularTransport;
    std::vector<std::vector<double>> gamma_;  // level j: |Lambda_{[j:]}| values
    std::vector<double> mass_;                // mass_[j] = s_j for advanced j
    int advanced_ = 0;
    legendre::ProductTable table_;
    legendre::Eval eval_;
};

class TriangularTransport {
public:
    explicit TriangularTransport(PolynomialSurrogate g, double zero_threshold = 1e-14)
        : g_(std::move(g)), zero_threshold_(zero_threshold) {
        s0_ = g_.mass();
        if (!(s0_ > 0.0))
            throw numeric_error("TriangularTransport: surrogate has zero mass");
        partition_ = build_tail_partition(g_.index_set());
        max_degree_.assign(g_.axis_degrees().begin(), g_.axis_degrees().end());
    }

    int dimension() const { return g_.dimension(); }
    double total_mass() const { return s0_; }
    const PolynomialSurrogate& surrogate() const { return g_; }
    const TailPartition& partition() const { return partition_; }

    TransportWorkspace make_workspace() const {
        TransportWorkspace ws;
        ws.gamma_.resize(dimension() + 1);
        for (int j = 0; j <= dimension(); ++j)
            ws.gamma_[j].resize(partition_.level_sizes[j]);
        ws.mass_.resize(dimension() + 1);
        return ws;
    }

    void begin(TransportWorkspace& ws) const {
        const auto coeffs = g_.coefficients();
        std::copy(coeffs.begin(), coeffs.end(), ws.gamma_[0].begin());
        ws.mass_[0] = s0_;
        ws.advanced_ = 0;
    }

    // s_j at the current head
    double head_mass(const TransportWorkspace& ws) const { return ws.mass_[ws.advanced_]; }

    // S_{axis+1}(head, x) without advancing; the head (levels <= axis) must
    // already be in place.
    double component(int axis, double x, TransportWorkspace& ws) const {
        require_axis(axis, ws);
        const double s_prev = ws.mass_[axis];
        if (degenerate(s_prev)) return x;
        ws.table_.assign(max_degree_[axis], x);
        return clamp01(accumulate_r(axis, ws) / s_prev);
    }

    // Computes S_{axis+1}, updates gammas for the next level, and returns
    // the component value.
    double advance(int axis, double x, TransportWorkspace& ws) const {
        require_axis(axis, ws);
        const double s_prev = ws.mass_[axis];
        ws.table_.assign(max_degree_[axis], x);
        const auto& basis = ws.table_.basis();

        const auto& gamma = ws.gamma_[axis];
        auto& next = ws.gamma_[axis + 1];
        double r = 0.0;
        double s = 0.0;
        for (const auto& group : partition_.groups[axis]) {
            const std::size_t count = group.members.size();
            double updated = 0.0;
            for (std::size_t a = 0; a < count; ++a) {
                const double ga = gamma[group.members[a]];
                const int da = group.degrees[a];
                r += ga * ga * ws.table_(da, da);
                for (std::size_t b = a + 1; b < count; ++b)
                    r += 2.0 * ga * gamma[group.members[b]] *
                         ws.table_(da, group.degrees[b]);
                updated += ga * basis.values[da];
            }
            next[group.parent] = updated;
            s += updated * updated;
        }
        ws.mass_[axis + 1] = s;
        ++ws.advanced_;
        if (degenerate(s_prev)) return x;
        return clamp01(r / s_prev);
    }

    void rosenblatt(std::span<const double> x, std::span<double> out,
                    TransportWorkspace& ws) const {
        check_point(x);
        begin(ws);
        for (int j = 0; j < dimension(); ++j) out[j] = advance(j, x[j], ws);
    }

    std::vector<double> rosenblatt(std::span<const double> x) const {
        TransportWorkspace ws = make_workspace();
        std::vector<double> out(dimension());
        rosenblatt(x, out, ws);
        return out;
    }

    // Componentwise bisection against y, each coordinate to `iters`
    // halvings; probes reuse the frozen head gammas.
    void inverse_rosenblatt(std::span<const double> y, std::span<double> out, int iters,
                            TransportWorkspace& ws) const {
        check_point(y);
        if (iters < 1) throw std::invalid_argument("inverse_rosenblatt: need iters >= 1");
        begin(ws);
        for (int j = 0; j < dimension(); ++j) {
            double x;
            if (degenerate(ws.mass_[j])) {
                x = y[j];  // S_j is the identity here
            } else {
                double lo = 0.0, hi = 1.0;
                x = 0.5;
                for (int it = 0; it < iters; ++it) {
                    if (component(j, x, ws) > y[j])
                        hi = x;
                    else
                        lo = x;
                    x = 0.5 * (lo + hi);
                }
            }
            out[j] = x;
            advance(j, x, ws);
        }
    }

    std::vector<double> inverse_rosenblatt(std::span<const double> y, int iters) const {
        TransportWorkspace ws = make_workspace();
        std::vector<double> out(dimension());
        inverse_rosenblatt(y, out, iters, ws);
        return out;
    }

    // n pushforward samples (row-major n x d): uniform draws mapped through
    // the inverse; substream per sample index, so any thread count yields
    // the same bits.
    std::vector<double> sample(std::size_t count, int iters, std::uint64_t seed) const {
        const int d = dimension();
        std::vector<double> out(count * d);
        const RngStream root(seed);
        par::parallel_for_chunks(count, [&](std::size_t begin, std::size_t end) {
            TransportWorkspace ws = make_workspace();
            std::vector<double> y(d);
            for (std::size_t i = begin; i < end; ++i) {
                RngStream stream = root.substream(i);
                for (int j = 0; j < d; ++j) y[j] = stream.uniform();
                inverse_rosenblatt(y, std::span<double>(out).subspan(i * d, d), iters, ws);
            }
        });
        return out;
    }

private:
    void require_axis(int axis, const TransportWorkspace& ws) const {
        if (axis != ws.advanced_)
            throw std::logic_error("TriangularTransport: workspace not at this axis");
        if (axis < 0 || axis >= dimension())
            throw std::invalid_argument("TriangularTransport: axis out of range");
    }

    void check_point(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != dimension())
            throw std::invalid_argument("TriangularTransport: dimension mismatch");
        for (double v : x)
            if (!(v >= 0.0 && v <= 1.0))
                throw std::domain_error("TriangularTransport: point outside [0,1]^d");
    }

    bool degenerate(double s_prev) const { return !(s_prev > zero_threshold_ * s0_); }

    static double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

    // r_j over all tail groups with the ws table already at (axis, x)
    double accumulate_r(int axis, const TransportWorkspace& ws) const {
        const auto& gamma = ws.gamma_[axis];
        double r = 0.0;
        for (const auto& group : partition_.groups[axis]) {
            const std::size_t count = group.members.size();
            for (std::size_t a = 0; a < count; ++a) {
                const double ga = gamma[group.members[a]];
                const int da = group.degrees[a];
                r += ga * ga * ws.table_(da, da);
                for (std::size_t b = a + 1; b < count; ++b)
                    r += 2.0 * ga * gamma[group.members[b]] *
                         ws.table_(da, group.degrees[b]);
            }
        }
        return r;
    }

    PolynomialSurrogate g_;
    TailPartition partition_;
    std::vector<int> max_degree_;
    double s0_ = 0.0;
    double zero_threshold_;
};

}  // namespace polykr
