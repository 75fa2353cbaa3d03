#pragma once

// Sliced Wasserstein distance
//     SW_p(mu, nu) = ( integral over S^{d-1} of W_p(mu_v, nu_v)^p dv )^(1/p)
// with the unnormalized surface measure (total mass A_d). The `normalized`
// flag divides the integral by A_d before the root. Inner 1D distances are
// exact, so all error comes from the direction rule.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "measures.hpp"
#include "ot1d.hpp"
#include "parallel.hpp"
#include "sphere.hpp"

namespace projot {

enum class SchemeKind { quadrature, monte_carlo };

struct SlicedScheme {
    SchemeKind kind = SchemeKind::quadrature;
    std::size_t size = 1024;  // grid resolution or Monte Carlo direction count
    std::uint64_t seed = 0;   // Monte Carlo only

    static SlicedScheme quadrature(std::size_t resolution) { return {SchemeKind::quadrature, resolution, 0}; }
    static SlicedScheme monte_carlo(std::size_t count, std::uint64_t seed) { return {SchemeKind::monte_carlo, count, seed}; }

    /// quadrature(1024) for d = 2, spiral quadrature(4096) for d = 3,
    /// monte_carlo(4096) otherwise.
    static SlicedScheme default_for(std::size_t d, std::uint64_t seed = 0)
    {
        if (d == 2)
            return quadrature(1024);
        if (d == 3)
            return quadrature(4096);
        return monte_carlo(4096, seed);
    }

    friend bool operator==(const SlicedScheme&, const SlicedScheme&) = default;
};

struct SlicedEstimate {
    double value = 0.0;
    SlicedScheme scheme;
    double std_error = 0.0;    // Monte Carlo standard error of `value`; 0 for quadrature
    double error_bound = 0.0;  // quadrature discretization bound on `value`; 0 for Monte Carlo
    bool normalized = false;
    double integral = 0.0;     // the (possibly normalized) integral before the p-th root
};

struct SlicedOptions {
    std::size_t threads = 1;
};

/// W_p(mu_v, nu_v)^p.
inline double projected_distance_pow(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Direction& v,
                                     double p)
{
    return wasserstein_1d_pow(project(mu, v), project(nu, v), p);
}

inline double projected_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Direction& v, double p)
{
    return std::pow(projected_distance_pow(mu, nu, v, p), 1.0 / p);
}

/// Weighted mean of the mixture (mu + nu) / 2. W_p(mu_v, nu_v) is invariant
/// under a common translation, so moments may be taken about this point.
inline std::vector<double> common_center(const DiscreteMeasure& mu, const DiscreteMeasure& nu)
{
    std::vector<double> c(mu.dim(), 0.0);
    for (const DiscreteMeasure* m : {&mu, &nu})
        for (std::size_t i = 0; i < m->size(); ++i)
            for (std::size_t k = 0; k < m->dim(); ++k)
                c[k] += 0.5 * m->weight(i) * m->point(i)[k];
    return c;
}

/// Lipschitz constant of v -> W_p(mu_v, nu_v) w.r.t. |u - v|:
/// M_p(mu - c) + M_p(nu - c) for the common center c.
inline double projection_lipschitz(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p)
{
    auto c = common_center(mu, nu);
    for (double& x : c)
        x = -x;
    return moment_p(translate(mu, c), p) + moment_p(translate(nu, c), p);
}

namespace detail {

inline void check_pair(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p)
{
    require_order(p);
    if (mu.dim() != nu.dim())
        throw Error(ErrorCode::DimensionMismatch, "measures live in different dimensions");
}

// |a^(1/p) - b^(1/p)| <= |a - b|^(1/p) for p >= 1.
inline double root_error(double integral_error, double p) { return std::pow(integral_error, 1.0 / p); }

} // namespace detail

inline SlicedEstimate sliced_wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                                         const SlicedScheme& scheme, bool normalized,
                                         const SlicedOptions& opts = {})
{
    detail::check_pair(mu, nu, p);
    const std::size_t d = mu.dim();
    SlicedEstimate est;
    est.scheme = scheme;
    est.normalized = normalized;

    if (d == 1) {
        // S^0 = {-1, +1} with counting measure; both directions give W_p^p.
        const double w = projected_distance_pow(mu, nu, Direction::axis(1, 0), p);
        est.integral = normalized ? w : 2.0 * w;
        est.value = std::pow(est.integral, 1.0 / p);
        return est;
    }

    const double area = surface_area(static_cast<int>(d));
    std::vector<Direction> dirs;
    std::vector<double> weights;
    if (scheme.kind == SchemeKind::quadrature) {
        auto grid = quadrature_grid(d, scheme.size);
        dirs = std::move(grid.directions);
        weights = std::move(grid.weights);
    } else {
        if (scheme.size < 2)
            throw Error(ErrorCode::ArgumentOutOfRange, "Monte Carlo needs at least two directions");
        dirs = sample_uniform(d, scheme.size, scheme.seed);
    }

    std::vector<double> h(dirs.size());
    parallel_for(dirs.size(), opts.threads, [&](std::size_t k) { h[k] = projected_distance_pow(mu, nu, dirs[k], p); });

    if (scheme.kind == SchemeKind::quadrature) {
        detail::CompensatedSum acc;
        for (std::size_t k = 0; k < h.size(); ++k)
            acc.add(weights[k] * h[k]);
        const double integral = std::max(0.0, acc.value());
        est.integral = normalized ? integral / area : integral;
        // h = W^p is Lipschitz with constant p L^p. Trapezoid cells on the
        // circle give |error| <= Lip * pi^2 / R; for the spiral grid the
        // cell radius is taken as 3 / sqrt(R) (an estimate, not a proof).
        const double lip = projection_lipschitz(mu, nu, p);
        const double lip_h = p * std::pow(lip, p);
        const double res = static_cast<double>(scheme.size);
        double integral_error = d == 2 ? lip_h * std::numbers::pi * std::numbers::pi / res
                                       : lip_h * area * 3.0 / std::sqrt(res);
        if (normalized)
            integral_error /= area;
        est.error_bound = detail::root_error(integral_error, p);
    } else {
        detail::CompensatedSum sum;
        for (double x : h)
            sum.add(x);
        const double n = static_cast<double>(h.size());
        const double mean = sum.value() / n;
        detail::CompensatedSum ss;
        for (double x : h)
            ss.add((x - mean) * (x - mean));
        const double sd = std::sqrt(ss.value() / (n - 1.0));
        const double factor = normalized ? 1.0 : area;
        est.integral = std::max(0.0, factor * mean);
        const double integral_se = factor * sd / std::sqrt(n);
        // Delta method through t -> t^(1/p).
        est.std_error = est.integral > 0.0 ? std::pow(est.integral, 1.0 / p - 1.0) * integral_se / p : 0.0;
    }
    est.value = std::pow(est.integral, 1.0 / p);
    return est;
}

inline SlicedEstimate sliced_wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                                         bool normalized = true)
{
    return sliced_wasserstein(mu, nu, p, SlicedScheme::default_for(mu.dim()), normalized);
}

} // namespace projot
