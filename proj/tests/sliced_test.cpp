#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <projot/sliced.hpp>

#include "test_support.hpp"

using namespace projot;

namespace {

constexpr double pi = std::numbers::pi;

} // namespace

TEST(Sliced, PointMassesCircle)
{
    const auto x = dirac({0.0, 0.0}), y = dirac({3.0, 4.0});
    const auto raw = sliced_wasserstein(x, y, 1.0, SlicedScheme::quadrature(4096), false);
    EXPECT_NEAR(raw.value, 20.0, 2.0 * pi * 1e-6);
    EXPECT_FALSE(raw.normalized);
    EXPECT_LE(std::abs(raw.value - 20.0), raw.error_bound);
    const auto avg = sliced_wasserstein(x, y, 1.0, SlicedScheme::quadrature(4096), true);
    EXPECT_NEAR(avg.value, 5.0 * 2.0 / pi, 1e-6);
    // average of cos^2 is 1/2
    EXPECT_NEAR(sliced_wasserstein(x, y, 2.0, SlicedScheme::quadrature(1024), true).value, 5.0 / std::sqrt(2.0),
                1e-9);
}

TEST(Sliced, PointMassesSphere)
{
    const auto x = dirac({0.0, 0.0, 0.0}), y = dirac({1.0, 2.0, 2.0});
    const auto est = sliced_wasserstein(x, y, 1.0, SlicedScheme::quadrature(16384), true);
    EXPECT_NEAR(est.value, 1.5, 1e-3);
    EXPECT_NEAR(sliced_wasserstein(x, y, 1.0, SlicedScheme::quadrature(16384), false).value, 3.0 * 2.0 * pi,
                4.0 * pi * 1e-3);
    EXPECT_NEAR(sliced_wasserstein(x, y, 2.0, SlicedScheme::quadrature(16384), true).value, 3.0 / std::sqrt(3.0),
                1e-3);
}

TEST(Sliced, DefaultOverloadIsNormalized)
{
    const auto est = sliced_wasserstein(dirac({0.0, 0.0}), dirac({1.0, 0.0}), 1.0);
    EXPECT_TRUE(est.normalized);
    EXPECT_EQ(est.scheme, SlicedScheme::quadrature(1024));
    EXPECT_NEAR(est.value, 2.0 / pi, 1e-5);
    EXPECT_EQ(SlicedScheme::default_for(3), SlicedScheme::quadrature(4096));
    EXPECT_EQ(SlicedScheme::default_for(5, 4).kind, SchemeKind::monte_carlo);
}

TEST(Sliced, OneDimensionUsesBothDirections)
{
    const auto a = dirac({0.0}), b = dirac({2.0});
    EXPECT_DOUBLE_EQ(sliced_wasserstein(a, b, 1.0, SlicedScheme::quadrature(8), true).value, 2.0);
    EXPECT_DOUBLE_EQ(sliced_wasserstein(a, b, 1.0, SlicedScheme::quadrature(8), false).value, 4.0);
}

TEST(Sliced, MonteCarloWithinStandardErrors)
{
    SplitMix64 rng(3);
    int outside = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto mu = random_cloud(3, 10, rng), nu = random_cloud(3, 10, rng, 1.5);
        const double exact = sliced_wasserstein(mu, nu, 2.0, SlicedScheme::quadrature(65536), true).value;
        const auto mc = sliced_wasserstein(mu, nu, 2.0, SlicedScheme::monte_carlo(4000, 100 + trial), true);
        EXPECT_GT(mc.std_error, 0.0);
        if (std::abs(mc.value - exact) > 3.0 * mc.std_error)
            ++outside;
    }
    EXPECT_LE(outside, 1);
}

TEST(Sliced, MonteCarloIsSeedDeterministic)
{
    SplitMix64 rng(4);
    const auto mu = random_cloud(4, 6, rng), nu = random_cloud(4, 6, rng);
    const auto a = sliced_wasserstein(mu, nu, 1.0, SlicedScheme::monte_carlo(256, 9), true);
    const auto b = sliced_wasserstein(mu, nu, 1.0, SlicedScheme::monte_carlo(256, 9), true, {.threads = 3});
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Sliced, MetricAxioms)
{
    SplitMix64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t d = 2 + rng.below(2);
        const auto scheme = SlicedScheme::quadrature(d == 2 ? 256 : 1024);
        const auto a = random_cloud(d, 1 + rng.below(8), rng, 1.0, true);
        const auto b = random_cloud(d, 1 + rng.below(8), rng, 1.0, true);
        const auto c = random_cloud(d, 1 + rng.below(8), rng, 1.0, true);
        const double p = 1.0 + 2.0 * rng.uniform();
        const double ab = sliced_wasserstein(a, b, p, scheme, true).value;
        const double ba = sliced_wasserstein(b, a, p, scheme, true).value;
        const double bc = sliced_wasserstein(b, c, p, scheme, true).value;
        const double ac = sliced_wasserstein(a, c, p, scheme, true).value;
        EXPECT_NEAR(ab, ba, 1e-12 * (1.0 + ab));
        EXPECT_EQ(sliced_wasserstein(a, a, p, scheme, true).value, 0.0);
        EXPECT_LE(ac, ab + bc + 1e-10);
    }
}

TEST(Sliced, RotationInvariantUpToQuadrature)
{
    SplitMix64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t d = 2 + rng.below(2);
        const auto mu = random_cloud(d, 6, rng), nu = random_cloud(d, 6, rng);
        const auto rot = oracle::random_rotation(d, rng);
        const auto scheme = SlicedScheme::quadrature(d == 2 ? 4096 : 65536);
        const auto base = sliced_wasserstein(mu, nu, 2.0, scheme, true);
        const auto moved = sliced_wasserstein(oracle::apply_matrix(mu, rot), oracle::apply_matrix(nu, rot), 2.0,
                                              scheme, true);
        EXPECT_NEAR(base.value, moved.value, d == 2 ? 1e-6 : 1e-3);
    }
}

TEST(Sliced, ErrorBoundCoversFineGrid)
{
    SplitMix64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto mu = random_cloud(2, 5, rng), nu = random_cloud(2, 5, rng);
        const double fine = sliced_wasserstein(mu, nu, 1.0, SlicedScheme::quadrature(1 << 16), false).value;
        const auto coarse = sliced_wasserstein(mu, nu, 1.0, SlicedScheme::quadrature(64), false);
        EXPECT_LE(std::abs(coarse.value - fine), coarse.error_bound);
    }
}

TEST(Sliced, BoundedByMomentSum)
{
    SplitMix64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto mu = random_cloud(2, 8, rng, 1.0, true), nu = random_cloud(2, 8, rng, 1.0, true);
        const double sw = sliced_wasserstein(mu, nu, 1.5, SlicedScheme::quadrature(512), true).value;
        EXPECT_LE(sw, moment_p(mu, 1.5) + moment_p(nu, 1.5) + 1e-12);
        EXPECT_LE(projected_distance(mu, nu, Direction::angle(0.3), 1.5), projection_lipschitz(mu, nu, 1.5) + 1e-12);
    }
}

TEST(Sliced, Errors)
{
    EXPECT_THROW(sliced_wasserstein(dirac({0.0, 0.0}), dirac({0.0}), 1.0), Error);
    EXPECT_THROW(sliced_wasserstein(dirac({0.0, 0.0}), dirac({1.0, 0.0}), 0.9), Error);
    EXPECT_THROW(sliced_wasserstein(dirac({0.0, 0.0, 0.0, 0.0}), dirac({1.0, 0.0, 0.0, 0.0}), 1.0,
                                    SlicedScheme::quadrature(64), true),
                 Error);
}
