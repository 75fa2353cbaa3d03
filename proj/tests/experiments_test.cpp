#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <projot/experiments.hpp>

#include "test_support.hpp"

using namespace projot;

TEST(ProjectedSquare, CdfExamples)
{
    const auto e1 = Direction::axis(2, 0);
    EXPECT_DOUBLE_EQ(projected_square_cdf(e1, 0.3), 0.3);
    EXPECT_EQ(projected_square_cdf(e1, -1.0), 0.0);
    EXPECT_EQ(projected_square_cdf(e1, 2.0), 1.0);

    // (U1 + U2) / sqrt(2) is triangular on [0, sqrt(2)] with median at sqrt(2) / 2
    const Direction diag({1.0, 1.0});
    EXPECT_NEAR(projected_square_cdf(diag, std::sqrt(2.0) / 2.0), 0.5, 1e-15);
    EXPECT_NEAR(projected_square_cdf(diag, std::sqrt(2.0) / 4.0), 0.125, 1e-15);

    // reflection: v = (-1, 0) has law uniform on [-1, 0]
    EXPECT_NEAR(projected_square_cdf(Direction::axis(2, 0, -1.0), -0.25), 0.75, 1e-15);
}

TEST(ProjectedSquare, CdfMatchesSampling)
{
    SplitMix64 rng(1);
    const Direction v({0.3, -0.7});
    const std::size_t n = 200000;
    const std::vector<double> xs{-0.6, -0.3, -0.1, 0.0, 0.2};
    std::vector<std::size_t> below(xs.size(), 0);
    for (std::size_t s = 0; s < n; ++s) {
        const double y = v[0] * rng.uniform() + v[1] * rng.uniform();
        for (std::size_t k = 0; k < xs.size(); ++k)
            below[k] += y <= xs[k];
    }
    for (std::size_t k = 0; k < xs.size(); ++k)
        EXPECT_NEAR(static_cast<double>(below[k]) / static_cast<double>(n), projected_square_cdf(v, xs[k]), 5e-3);
}

TEST(ProjectedSquare, UniformizingMap)
{
    EXPECT_NEAR(uniformizing_map(Direction({1.0, 1.0})).lipschitz(), std::sqrt(2.0), 1e-14);
    EXPECT_DOUBLE_EQ(uniformizing_map(Direction::axis(2, 1)).lipschitz(), 1.0);
    SplitMix64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto v = sample_uniform(2, 1, rng.next()).front();
        const auto g = uniformizing_map(v);
        EXPECT_LE(g.lipschitz(), std::sqrt(2.0) + 1e-12);
        // difference quotients never exceed the stated constant
        for (int k = 0; k < 200; ++k) {
            const double x = -1.5 + 3.0 * rng.uniform(), y = x + 1e-3 * rng.uniform();
            if (y > x) {
                EXPECT_LE((g(y) - g(x)) / (y - x), g.lipschitz() * (1.0 + 1e-9));
            }
        }
        std::vector<double> u;
        for (int s = 0; s < 20000; ++s)
            u.push_back(g(v[0] * rng.uniform() + v[1] * rng.uniform()));
        EXPECT_LT(ks_statistic_uniform(u), 1.63 / std::sqrt(20000.0));
    }
}

TEST(ProjectedSquare, KsDetectsNonUniform)
{
    std::vector<double> u;
    for (int s = 0; s < 1000; ++s)
        u.push_back(std::pow((s + 0.5) / 1000.0, 2.0));
    EXPECT_GT(ks_statistic_uniform(u), 0.2);
    EXPECT_NEAR(ks_statistic_uniform({0.25, 0.75}), 0.25, 1e-15);
}

TEST(FitLogLog, RecoversPowerLaw)
{
    const std::vector<std::size_t> ns{10, 20, 40, 80, 160};
    std::vector<double> ys;
    for (auto n : ns)
        ys.push_back(3.0 * std::pow(static_cast<double>(n), -0.5));
    const auto fit = fit_log_log(Estimator::SW, ns, ys);
    EXPECT_NEAR(fit.slope, -0.5, 1e-12);
    EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-12);
    EXPECT_NEAR(fit.residual, 0.0, 1e-12);
    EXPECT_EQ(fit.n_min, 10u);
    EXPECT_EQ(fit.n_max, 160u);
    EXPECT_THROW(fit_log_log(Estimator::SW, {1, 2, 3}, {1.0, 0.5, 0.3}), Error);
}

TEST(Spearman, RanksAndTies)
{
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {10, 20, 30}), 1.0);
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {3, 2, 1}), -1.0);
    EXPECT_DOUBLE_EQ(spearman({0, 0, 0}, {0, 0, 0}), 1.0);
    EXPECT_NEAR(spearman({1, 2, 2, 3}, {1, 2, 3, 4}), 0.9486832980505138, 1e-12);
}

TEST(CdScan, OneDimensionIsExactlyOne)
{
    const auto res = cd_lower_bound_scan(1, 1.0, 30, 4);
    EXPECT_NEAR(res.bound, 1.0, 1e-12);
    EXPECT_GE(res.bound, 1.0);
    EXPECT_EQ(res.evaluated + res.skipped, 30u);
    for (double r : res.ratios)
        EXPECT_NEAR(r, 1.0, 1e-12);
}

TEST(CdScan, RatiosAtLeastOneAndDeterministic)
{
    const auto a = cd_lower_bound_scan(2, 2.0, 12, 5, 1e-6, 6);
    const auto b = cd_lower_bound_scan(2, 2.0, 12, 5, 1e-6, 6, 2);
    EXPECT_GE(a.bound, 1.0);
    EXPECT_LE(a.bound, std::sqrt(2.0) + 1e-6);
    EXPECT_EQ(a.ratios, b.ratios);
    EXPECT_EQ(a.argmax, b.argmax);
    EXPECT_THROW(cd_lower_bound_scan(4, 1.0, 2, 1), Error);
}

TEST(Audit, ChainHoldsOnRandomInstances)
{
    AuditConfig cfg;
    cfg.instances_per_cell = 6;
    cfg.max_support = 8;
    const auto rep = inequality_audit(cfg);
    EXPECT_EQ(rep.instances.size(), 24u);
    EXPECT_EQ(rep.chain_violations, 0u);
    EXPECT_EQ(rep.budget_exceeded, 0u);
    EXPECT_GE(rep.min_margin_sliced, 0.0);
    EXPECT_GE(rep.min_margin_max, 0.0);
    EXPECT_EQ(rep.violations, rep.chain_violations + rep.sqrt_d_violations);
    for (const auto& inst : rep.instances)
        EXPECT_EQ(inst.margin_sqrt_d.has_value(), inst.p == 2.0);
    const auto js = summary_json(rep);
    EXPECT_EQ(js["schema"], 1);
    EXPECT_EQ(js["chain_violations"], 0);
}

TEST(Audit, PointMassesMatchAnalyticValues)
{
    const auto a = audit_instance(dirac({0.0, 0.0}), dirac({3.0, 4.0}), 1.0, 1e-6, 1e-6);
    EXPECT_LE(std::abs(a.sw_normalized - 10.0 / std::numbers::pi), a.sw_error_bound);
    EXPECT_NEAR(a.sw_normalized, 10.0 / std::numbers::pi, 1e-5);
    EXPECT_NEAR(a.w_exact, 5.0, 1e-12);
    EXPECT_NEAR(a.max_lower, 5.0, 1e-9);
    EXPECT_EQ(a.violations, 0u);
    const auto same = audit_instance(dirac({1.0, 1.0}), dirac({1.0, 1.0}), 2.0, 1e-6, 1e-6);
    EXPECT_EQ(same.sw_normalized, 0.0);
    EXPECT_EQ(same.w_exact, 0.0);
    EXPECT_EQ(same.max_lower, 0.0);
    EXPECT_EQ(same.violations, 0u);
}

TEST(Audit, SqrtDimensionBoundFailsOnSmallInstance)
{
    // Three points each; W_2 exceeds sqrt(2) maxSW_2 by about 20%.
    const auto mu = make_discrete({{-2.0, 2.0}, {-2.0, -2.0}, {1.0, 1.0}});
    const auto nu = make_discrete({{-1.0, 2.0}, {0.0, -2.0}, {-2.0, 0.0}});
    const double w = oracle::brute_force_uniform_w(mu, nu, 2.0);
    const auto ms = max_sliced_certified(mu, nu, 2.0, 1e-9);
    EXPECT_GT(w, std::sqrt(2.0) * ms.upper * 1.15);
    const auto a = audit_instance(mu, nu, 2.0, 1e-6, 1e-6);
    ASSERT_TRUE(a.margin_sqrt_d.has_value());
    EXPECT_LT(*a.margin_sqrt_d, 0.0);
    EXPECT_EQ(a.violations, 1u);
}

TEST(Convergence, TranslationSchedule)
{
    ConvergenceConfig cfg;
    cfg.target = GeneratorSpec::empirical_of(GeneratorSpec::uniform_cube(2), 16);
    cfg.schedule.steps = {1, 2, 4, 8, 1000000000};
    cfg.tol = 1e-9;
    cfg.eps = 1e-6;
    const auto rep = convergence_suite(cfg);
    ASSERT_EQ(rep.rows.size(), 5u);
    // translating by t e_1 moves every distance by exactly t, except SW which
    // averages |cos|; the default 1024-point rule has relative error h^2 / 12
    const double h = 2.0 * std::numbers::pi / 1024.0;
    for (const auto& r : rep.rows) {
        const double t = 1.0 / static_cast<double>(r.n);
        EXPECT_NEAR(r.w, t, 1e-9);
        EXPECT_NEAR(r.max_lower, t, 1e-9);
        EXPECT_NEAR(r.sw, 2.0 / std::numbers::pi * t * (1.0 - h * h / 12.0), 1e-9 * t + 1e-15);
    }
    EXPECT_TRUE(rep.all_decreasing);
    EXPECT_TRUE(rep.ordering_ok);
    EXPECT_TRUE(rep.converged);
    EXPECT_TRUE(rep.passed);
}

TEST(Convergence, ConstantAndPrefixSchedules)
{
    ConvergenceConfig cfg;
    cfg.target = GeneratorSpec::empirical_of(GeneratorSpec::uniform_cube(2), 32);
    cfg.schedule.kind = ScheduleKind::constant;
    cfg.schedule.steps = {1, 2, 3};
    const auto still = convergence_suite(cfg);
    for (const auto& r : still.rows) {
        EXPECT_EQ(r.w, 0.0);
        EXPECT_EQ(r.sw, 0.0);
        EXPECT_EQ(r.max_lower, 0.0);
    }
    EXPECT_TRUE(still.converged);

    cfg.schedule.kind = ScheduleKind::empirical_prefix;
    cfg.schedule.steps = {1, 2, 4, 8, 16, 32};
    cfg.tol = 1e-4;
    const auto prefix = convergence_suite(cfg);
    EXPECT_TRUE(prefix.ordering_ok);
    EXPECT_EQ(prefix.rows.back().w, 0.0);
    cfg.schedule.steps = {64};
    EXPECT_THROW(convergence_suite(cfg), Error);
}

TEST(RateExperiment, SmallRunIsReproducible)
{
    RateConfig cfg;
    cfg.d = 2;
    cfg.n_list = {8, 16, 32, 64};
    cfg.reps = 2;
    cfg.maxsw_starts = 2;
    const auto a = rate_experiment(cfg);
    cfg.threads = 3;
    const auto b = rate_experiment(cfg);
    ASSERT_EQ(a.records.size(), 4u * 2u * 3u);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k)
        EXPECT_TRUE(a.records[k].same_result(b.records[k])) << k;
    EXPECT_TRUE(a.trend_only);
    EXPECT_EQ(a.fits.size(), 3u);
    for (const auto& r : a.records) {
        EXPECT_GT(r.value, 0.0);
        EXPECT_EQ(r.std_error, 0.0);  // d = 2 uses quadrature
    }
    // SW <= maxSW <= W within each replication
    for (std::size_t k = 0; k < a.records.size(); k += 3) {
        EXPECT_LE(a.records[k + 1].value, a.records[k + 2].value + 1e-3);
        EXPECT_LE(a.records[k + 2].value, a.records[k].value + 1e-9);
    }

    std::ostringstream jl;
    write_jsonl(jl, a.records);
    std::istringstream in(jl.str());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_TRUE(j.contains("estimator"));
        EXPECT_TRUE(j.contains("wall_time"));
        ++lines;
    }
    EXPECT_EQ(lines, a.records.size());
    EXPECT_EQ(summary_json(a)["schema"], 1);

    cfg.n_list = {16, 8};
    EXPECT_THROW(rate_experiment(cfg), Error);
}
