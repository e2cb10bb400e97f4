#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "polykr/multi_index.hpp"
#include "polykr/transport.hpp"
#include "support.hpp"

using polykr::MultiIndexSet;
using polykr::PolynomialSurrogate;
using polykr::RngStream;
using polykr::TriangularTransport;

namespace {

PolynomialSurrogate pure_l1() {
    return PolynomialSurrogate(MultiIndexSet::from_rows(1, {{0}, {1}}), {0.0, 1.0});
}

double cubic_cdf(double x) {
    const double u = 2.0 * x - 1.0;
    return (u * u * u + 1.0) / 2.0;
}

}  // namespace

TEST_CASE("construction") {
    SECTION("uniform surrogate is the identity map") {
        const PolynomialSurrogate g(MultiIndexSet::from_rows(1, {{0}}), {1.0});
        const TriangularTransport t(g);
        CHECK(t.total_mass() == 1.0);
        for (double x : {0.0, 0.37, 1.0}) {
            CHECK_THAT(t.rosenblatt(std::vector<double>{x})[0],
                       Catch::Matchers::WithinAbs(x, 1e-15));
            CHECK_THAT(t.inverse_rosenblatt(std::vector<double>{x}, 48)[0],
                       Catch::Matchers::WithinAbs(x, 0x1p-48));
        }
    }
    SECTION("zero surrogate is rejected") {
        const PolynomialSurrogate g(MultiIndexSet::from_rows(1, {{0}, {1}}), {0.0, 0.0});
        CHECK_THROWS_AS(TriangularTransport(g), polykr::numeric_error);
    }
}

TEST_CASE("one-dimensional cubic: S is the analytic CDF") {
    const TriangularTransport t(pure_l1());
    for (double x : {0.0, 0.1, 0.25, 0.5, 0.77, 1.0}) {
        CHECK_THAT(t.rosenblatt(std::vector<double>{x})[0],
                   Catch::Matchers::WithinAbs(cubic_cdf(x), 1e-14));
    }
    // boundary normalization
    CHECK_THAT(t.rosenblatt(std::vector<double>{0.0})[0], Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(t.rosenblatt(std::vector<double>{1.0})[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("one-dimensional cubic: bisection inverse") {
    const TriangularTransport t(pure_l1());
    // at y = 1/2 the density vanishes at the root, so resolution is limited
    // by cancellation in S(x) - y; a moderate depth keeps the guarantee
    CHECK_THAT(t.inverse_rosenblatt(std::vector<double>{0.5}, 16)[0],
               Catch::Matchers::WithinAbs(0.5, 0x1p-16));
    // away from the flat point full depth applies
    for (double y : {0.05, 0.3, 0.9}) {
        const double x = t.inverse_rosenblatt(std::vector<double>{y}, 48)[0];
        CHECK_THAT(cubic_cdf(x), Catch::Matchers::WithinAbs(y, 1e-12));
    }
}

TEST_CASE("fast evaluator agrees with the naive double sum") {
    RngStream rng(2718);
    for (int trial = 0; trial < 6; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform() * 3);
        const std::size_t size = 5 + static_cast<std::size_t>(rng.uniform() * 16);
        const auto lambda = testsupport::random_downward_closed(d, size, rng);
        std::vector<double> coeffs(lambda.size());
        for (auto& c : coeffs) c = 2.0 * rng.uniform() - 1.0;
        const PolynomialSurrogate g(lambda, coeffs);
        const TriangularTransport t(g);

        std::vector<double> x(d);
        for (int rep = 0; rep < 25; ++rep) {
            for (int j = 0; j < d; ++j) x[j] = rng.uniform();
            const auto fast = t.rosenblatt(x);
            const auto naive = testsupport::naive_transport_S(g, x);
            for (int j = 0; j < d; ++j)
                REQUIRE_THAT(fast[j], Catch::Matchers::WithinAbs(naive[j], 1e-11));
        }
    }
}

TEST_CASE("mass telescoping: s_{j-1} integrates s_j over the next axis") {
    RngStream rng(5150);
    const auto g = testsupport::random_positive_surrogate(3, 14, rng);
    const TriangularTransport t(g);
    auto ws = t.make_workspace();

    for (int rep = 0; rep < 5; ++rep) {
        const double head[2] = {rng.uniform(), rng.uniform()};
        for (int j = 0; j < 2; ++j) {
            t.begin(ws);
            for (int i = 0; i < j; ++i) t.advance(i, head[i], ws);
            const double s_prev = t.head_mass(ws);
            // integrate s_j over x_{j+1} with 64-point Gauss
            const double integral = testsupport::gauss_integral(
                [&](double xj) {
                    auto ws2 = t.make_workspace();
                    t.begin(ws2);
                    for (int i = 0; i < j; ++i) t.advance(i, head[i], ws2);
                    t.advance(j, xj, ws2);
                    return t.head_mass(ws2);
                },
                0.0, 1.0, 64);
            REQUIRE_THAT(integral, Catch::Matchers::WithinAbs(s_prev, 1e-10));
        }
    }
}

TEST_CASE("product of conditional slopes recovers the normalized density") {
    RngStream rng(31337);
    const auto g = testsupport::random_positive_surrogate(2, 10, rng);
    const TriangularTransport t(g);
    const double h = 1e-6;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x{0.05 + 0.9 * rng.uniform(), 0.05 + 0.9 * rng.uniform()};
        double product = 1.0;
        for (int j = 0; j < 2; ++j) {
            auto hi = x, lo = x;
            hi[j] += h;
            lo[j] -= h;
            product *= (t.rosenblatt(hi)[j] - t.rosenblatt(lo)[j]) / (2 * h);
        }
        const double gv = g(x);
        REQUIRE_THAT(product, Catch::Matchers::WithinAbs(gv * gv / t.total_mass(), 1e-4));
    }
}

TEST_CASE("scale invariance: 10 g builds the same transport") {
    RngStream rng(99);
    const auto g = testsupport::random_positive_surrogate(2, 12, rng);
    std::vector<double> scaled(g.coefficients().begin(), g.coefficients().end());
    for (auto& c : scaled) c *= 10.0;
    const TriangularTransport a(g);
    const TriangularTransport b(PolynomialSurrogate(g.index_set(), scaled));
    for (int rep = 0; rep < 40; ++rep) {
        const std::vector<double> x{rng.uniform(), rng.uniform()};
        const auto sa = a.rosenblatt(x);
        const auto sb = b.rosenblatt(x);
        CHECK_THAT(sa[0], Catch::Matchers::WithinAbs(sb[0], 1e-12));
        CHECK_THAT(sa[1], Catch::Matchers::WithinAbs(sb[1], 1e-12));
    }
}

TEST_CASE("round trip T(S(x)) for strictly positive surrogates") {
    RngStream rng(404);
    for (int trial = 0; trial < 4; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform() * 3);
        const auto g = testsupport::random_positive_surrogate(d, 8 + 2 * trial, rng);
        const TriangularTransport t(g);

        // Lipschitz measurement: L = (2/M) max |d f / dx_j| on a grid,
        // with f = g^2
        double min_f = 1e300, max_grad = 0.0;
        const int grid = d == 1 ? 101 : (d == 2 ? 21 : 9);
        std::vector<int> ticks(d, 0);
        std::vector<double> x(d);
        while (true) {
            for (int j = 0; j < d; ++j) x[j] = static_cast<double>(ticks[j]) / (grid - 1);
            const double gv = g(x);
            min_f = std::min(min_f, gv * gv);
            for (int j = 0; j < d; ++j)
                max_grad = std::max(max_grad, std::abs(2.0 * gv * g.partial_derivative(j, x)));
            int j = d - 1;
            for (; j >= 0; --j) {
                if (ticks[j] < grid - 1) {
                    ++ticks[j];
                    break;
                }
                ticks[j] = 0;
            }
            if (j < 0) break;
        }
        const double lip = 2.0 * max_grad / min_f;
        const double bound = std::pow(lip + 1.0, d) * 0x1p-48 + 1e-12;

        for (int rep = 0; rep < 30; ++rep) {
            for (int j = 0; j < d; ++j) x[j] = rng.uniform();
            const auto y = t.rosenblatt(x);
            const auto back = t.inverse_rosenblatt(y, 48);
            double l1 = 0.0;
            for (int j = 0; j < d; ++j) l1 += std::abs(back[j] - x[j]);
            REQUIRE(l1 <= bound);
        }
    }
}

TEST_CASE("pushforward sampling") {
    SECTION("uniform surrogate passes a chi-square uniformity test") {
        const PolynomialSurrogate g(MultiIndexSet::from_rows(2, {{0, 0}}), {1.0});
        const TriangularTransport t(g);
        const std::size_t n = 10000;
        const auto samples = t.sample(n, 48, 7);
        // 10 bins per axis, d = 2: 100 cells, 99 dof, 1% critical 134.642
        std::vector<int> counts(100, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const int bx = std::min(9, static_cast<int>(samples[2 * i] * 10));
            const int by = std::min(9, static_cast<int>(samples[2 * i + 1] * 10));
            ++counts[bx * 10 + by];
        }
        double chi2 = 0.0;
        const double expect = n / 100.0;
        for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
        CHECK(chi2 < 134.642);
    }
    SECTION("cubic density: empirical CDF matches") {
        const TriangularTransport t(pure_l1());
        const std::size_t n = 100000;
        const auto samples = t.sample(n, 48, 12345);
        CHECK(testsupport::ks_statistic({samples.begin(), samples.end()}, cubic_cdf) < 0.01);
    }
    SECTION("near-zero valley separates the two modes") {
        const TriangularTransport t(pure_l1());
        const std::size_t n = 100000;
        const auto samples = t.sample(n, 48, 2);
        std::vector<int> bins(20, 0);
        for (double s : samples) ++bins[std::min(19, static_cast<int>(s * 20))];
        int peak = 0;
        for (int b : bins) peak = std::max(peak, b);
        const int valley = std::max(bins[9], bins[10]);  // bins around x = 1/2
        CHECK(valley <= peak / 100);
    }
    SECTION("sampling is reproducible and thread-count independent") {
        const TriangularTransport t(pure_l1());
        polykr::par::set_max_threads(1);
        const auto a = t.sample(512, 48, 99);
        polykr::par::set_max_threads(8);
        const auto b = t.sample(512, 48, 99);
        CHECK(a == b);
    }
}

TEST_CASE("smoothness-driven bisection depth") {
    CHECK(polykr::default_bisection_iters(std::nullopt, 1000, 2) == 48);
    const polykr::SmoothnessHint hint{2.0, 1.0};
    // ceil((k+alpha)/d * log2 |Lambda|)
    CHECK(polykr::default_bisection_iters(hint, 256, 2) ==
          static_cast<int>(std::ceil(1.5 * 8.0)));
}

TEST_CASE("domain validation") {
    const TriangularTransport t(pure_l1());
    CHECK_THROWS_AS(t.rosenblatt(std::vector<double>{1.5}), std::domain_error);
    CHECK_THROWS_AS(t.inverse_rosenblatt(std::vector<double>{-0.1}, 48), std::domain_error);
    CHECK_THROWS_AS(t.inverse_rosenblatt(std::vector<double>{0.5}, 0), std::invalid_argument);
}
