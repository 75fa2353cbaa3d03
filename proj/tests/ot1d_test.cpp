#include <gtest/gtest.h>

#include <cmath>

#include <projot/ot1d.hpp>
#include <projot/ot_exact.hpp>

#include "test_support.hpp"

using namespace projot;

namespace {

Measure1D m1(std::vector<double> atoms, std::vector<double> weights) { return Measure1D(atoms, weights); }

DiscreteMeasure random_1d(SplitMix64& rng, std::size_t max_n)
{
    const std::size_t n = 1 + rng.below(max_n);
    auto mu = random_cloud(1, n, rng, 0.5 + 2.0 * rng.uniform(), rng.uniform() < 0.7);
    // Integer lattice points now and then so ties and duplicates appear.
    if (rng.uniform() < 0.3)
        mu = pushforward(mu, 1, [](std::span<const double> x, std::span<double> y) { y[0] = std::round(3.0 * x[0]); });
    return mu;
}

} // namespace

TEST(ToMeasure1D, SortsAndMerges)
{
    const auto a = to_measure1d(make_discrete({{1.0}, {0.0}}, {0.5, 0.5}));
    EXPECT_EQ(a.atoms()[0], 0.0);
    EXPECT_EQ(a.atoms()[1], 1.0);

    const auto b = to_measure1d(make_discrete({{0.0}, {0.0}, {1.0}}, {0.25, 0.25, 0.5}));
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b.weights()[0], 0.5);
    EXPECT_EQ(b.weights()[1], 0.5);
    EXPECT_EQ(b.cum().back(), 1.0);

    const auto c = to_measure1d(dirac({4.0}));
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c.weights()[0], 1.0);

    EXPECT_THROW(to_measure1d(dirac({0.0, 1.0})), Error);
}

TEST(Quantile, StrictExceedanceConvention)
{
    const auto m = m1({0.0, 1.0}, {0.5, 0.5});
    EXPECT_EQ(quantile(m, 0.25), 0.0);
    EXPECT_EQ(quantile(m, 0.5), 1.0);  // mu((-inf, 0]) = 0.5 is not > 0.5
    EXPECT_EQ(quantile(m, 0.0), 0.0);
    EXPECT_EQ(quantile(m, 0.999), 1.0);
    const auto d = m1({-2.5}, {1.0});
    for (double t : {0.0, 0.3, 0.9999})
        EXPECT_EQ(quantile(d, t), -2.5);
    EXPECT_THROW(quantile(m, 1.0), Error);
    EXPECT_THROW(quantile(m, -0.1), Error);
}

TEST(Wasserstein1D, Examples)
{
    const auto a = m1({0.0, 1.0}, {0.5, 0.5});
    EXPECT_EQ(wasserstein_1d(a, a, 1.0), 0.0);
    EXPECT_EQ(wasserstein_1d(a, a, 2.7), 0.0);
    for (double p : {1.0, 1.5, 2.0, 3.0})
        EXPECT_NEAR(wasserstein_1d(m1({-1.0}, {1.0}), m1({2.5}, {1.0}), p), 3.5, 1e-14);
    // quantile gap is 0.5 on both halves of [0, 1)
    EXPECT_DOUBLE_EQ(wasserstein_1d(a, m1({0.5}, {1.0}), 1.0), 0.5);
    EXPECT_THROW(wasserstein_1d(a, a, 0.9), Error);
}

TEST(Wasserstein1D, MatchesMidpointQuantileIntegral)
{
    // Dyadic weights make every breakpoint a grid point of the oracle, so the
    // midpoint rule is exact up to rounding.
    SplitMix64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::pair<double, double>> a, b;
        for (int k = 0; k < 8; ++k)
            a.emplace_back(rng.normal(), 0.125);
        for (int k = 0; k < 4; ++k)
            b.emplace_back(rng.normal(), 0.25);
        std::vector<double> av, aw, bv, bw;
        for (auto [x, w] : a) {
            av.push_back(x);
            aw.push_back(w);
        }
        for (auto [x, w] : b) {
            bv.push_back(x);
            bw.push_back(w);
        }
        const double oracle = oracle::quantile_integral_1d(a, b, 1.7, 1024);
        EXPECT_NEAR(wasserstein_1d_pow(Measure1D(av, aw), Measure1D(bv, bw), 1.7), oracle, 1e-12);
    }
}

TEST(MonotoneCoupling, Examples)
{
    const auto plan = monotone_coupling(m1({3.0}, {1.0}), m1({-1.0}, {1.0}));
    ASSERT_EQ(plan.size(), 1u);
    EXPECT_EQ(plan[0], (CouplingEntry{0, 0, 1.0}));

    const auto a = m1({0.0, 1.0}, {0.5, 0.5});
    const auto diag = monotone_coupling(a, a);
    ASSERT_EQ(diag.size(), 2u);
    EXPECT_EQ(diag[0], (CouplingEntry{0, 0, 0.5}));
    EXPECT_EQ(diag[1], (CouplingEntry{1, 1, 0.5}));

    const auto half = m1({0.5}, {1.0});
    const auto plan2 = monotone_coupling(a, half);
    ASSERT_EQ(plan2.size(), 2u);
    EXPECT_EQ(plan2[0], (CouplingEntry{0, 0, 0.5}));
    EXPECT_EQ(plan2[1], (CouplingEntry{1, 0, 0.5}));
    EXPECT_DOUBLE_EQ(coupling_cost(a, half, plan2, 1.0), 0.5);
}

TEST(MonotoneCoupling, MarginalsMonotonicityAndCost)
{
    SplitMix64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto mu = to_measure1d(random_1d(rng, 30));
        const auto nu = to_measure1d(random_1d(rng, 30));
        const auto plan = monotone_coupling(mu, nu);
        std::vector<double> rows(mu.size(), 0.0), cols(nu.size(), 0.0);
        double total = 0.0;
        for (std::size_t k = 0; k < plan.size(); ++k) {
            EXPECT_GT(plan[k].mass, 0.0);
            rows[plan[k].i] += plan[k].mass;
            cols[plan[k].j] += plan[k].mass;
            total += plan[k].mass;
            if (k > 0) {
                EXPECT_GE(plan[k].i, plan[k - 1].i);
                EXPECT_GE(plan[k].j, plan[k - 1].j);
            }
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
        for (std::size_t i = 0; i < mu.size(); ++i)
            EXPECT_NEAR(rows[i], mu.weights()[i], 1e-12);
        for (std::size_t j = 0; j < nu.size(); ++j)
            EXPECT_NEAR(cols[j], nu.weights()[j], 1e-12);
        for (double p : {1.0, 2.0, 3.0}) {
            const double w = wasserstein_1d_pow(mu, nu, p);
            EXPECT_NEAR(coupling_cost(mu, nu, plan, p), w, 1e-12 * std::max(1.0, w));
        }
    }
}

TEST(Wasserstein1D, MetricAxiomsAndTranslation)
{
    SplitMix64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_1d(rng, 20), b = random_1d(rng, 20), c = random_1d(rng, 20);
        const double p = 1.0 + 2.0 * rng.uniform();
        const auto ma = to_measure1d(a), mb = to_measure1d(b), mc = to_measure1d(c);
        EXPECT_EQ(wasserstein_1d(ma, mb, p), wasserstein_1d(mb, ma, p));
        EXPECT_EQ(wasserstein_1d(ma, ma, p), 0.0);
        EXPECT_LE(wasserstein_1d(ma, mc, p), wasserstein_1d(ma, mb, p) + wasserstein_1d(mb, mc, p) + 1e-10);
        const std::vector<double> shift{rng.normal()};
        const double moved = wasserstein_1d(to_measure1d(translate(a, shift)), to_measure1d(translate(b, shift)), p);
        EXPECT_NEAR(moved, wasserstein_1d(ma, mb, p), 1e-12 * std::max(1.0, moved) + 1e-12);
    }
}

TEST(Wasserstein1D, AgreesWithLinearProgram)
{
    SplitMix64 rng(29);
    for (int trial = 0; trial < 60; ++trial) {
        const auto a = random_1d(rng, 25), b = random_1d(rng, 25);
        for (double p : {1.0, 1.5, 2.0, 3.0}) {
            const double q = wasserstein_1d(to_measure1d(a), to_measure1d(b), p);
            const double lp = wasserstein_exact(a, b, p, TransportSolver::simplex).primal_value;
            EXPECT_NEAR(q, lp, 1e-9 * std::max(q, 1e-300) + 1e-15) << "trial " << trial << " p " << p;
        }
    }
}
