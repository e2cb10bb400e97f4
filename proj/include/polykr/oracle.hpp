#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>

namespace polykr {

// Pointwise evaluator of an unnormalized density on [0,1]^d. Every call is
// counted; the counter is the cost unit the convergence studies report.
// Implementations must be safe for concurrent evaluation.
class DensityOracle {
public:
    DensityOracle() = default;
    virtual ~DensityOracle() = default;

    // copies start with a fresh counter
    DensityOracle(const DensityOracle&) noexcept {}
    DensityOracle& operator=(const DensityOracle&) noexcept { return *this; }

    double operator()(std::span<const double> x) const {
        count_.fetch_add(1, std::memory_order_relaxed);
        return density(x);
    }

    virtual int dimension() const = 0;

    long evaluations() const { return count_.load(std::memory_order_relaxed); }
    void reset_evaluations() const { count_.store(0, std::memory_order_relaxed); }

private:
    virtual double density(std::span<const double> x) const = 0;
    mutable std::atomic<long> count_{0};
};

class FunctionOracle final : public DensityOracle {
public:
    FunctionOracle(int dim, std::function<double(std::span<const double>)> fn)
        : dim_(dim), fn_(std::move(fn)) {}

    int dimension() const override { return dim_; }

private:
    double density(std::span<const double> x) const override { return fn_(x); }

    int dim_;
    std::function<double(std::span<const double>)> fn_;
};

}  // namespace polykr
