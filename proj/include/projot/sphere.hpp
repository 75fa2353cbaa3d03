#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "error.hpp"
#include "measures.hpp"
#include "ot1d.hpp"
#include "rng.hpp"

namespace projot {

/// Unit vector in R^d.
class Direction {
public:
    /// Normalizes `v`; a zero or non-finite vector is rejected.
    explicit Direction(std::vector<double> v) : v_(std::move(v))
    {
        const double r = norm(v_);
        if (!(r > 0.0) || !std::isfinite(r))
            throw Error(ErrorCode::ArgumentOutOfRange, "direction must be a nonzero finite vector");
        for (double& x : v_)
            x /= r;
    }

    static Direction axis(std::size_t dim, std::size_t k, double sign = 1.0)
    {
        std::vector<double> v(dim, 0.0);
        v.at(k) = sign;
        return Direction(std::move(v));
    }

    static Direction angle(double theta) { return Direction({std::cos(theta), std::sin(theta)}); }

    std::size_t dim() const noexcept { return v_.size(); }
    std::span<const double> values() const noexcept { return v_; }
    double operator[](std::size_t k) const noexcept { return v_[k]; }

    friend bool operator==(const Direction&, const Direction&) = default;

private:
    std::vector<double> v_;
};

inline double chord(const Direction& a, const Direction& b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.dim(); ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return std::sqrt(s);
}

/// A_d = 2 pi^(d/2) / Gamma(d/2), total surface measure of S^{d-1}.
inline double surface_area(int d)
{
    if (d < 2)
        throw Error(ErrorCode::InvalidDimension, "surface_area needs d >= 2");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Normalized standard Gaussian vectors.
inline std::vector<Direction> sample_uniform(std::size_t d, std::size_t count, std::uint64_t seed)
{
    if (d == 0 || count == 0)
        throw Error(ErrorCode::ArgumentOutOfRange, "sample_uniform needs d >= 1 and count >= 1");
    SplitMix64 rng(seed);
    std::vector<Direction> out;
    out.reserve(count);
    std::vector<double> v(d);
    while (out.size() < count) {
        double r2 = 0.0;
        for (double& x : v) {
            x = rng.normal();
            r2 += x * x;
        }
        if (r2 > 1e-300)
            out.emplace_back(v);
    }
    return out;
}

/// Directions with weights summing to A_d (unnormalized surface measure).
struct QuadratureGrid {
    std::vector<Direction> directions;
    std::vector<double> weights;
    std::size_t dim = 0;
};

/// d = 2: equally spaced angles (trapezoid rule). d = 3: Fibonacci spiral with
/// equal weights. Other dimensions should use sample_uniform.
inline QuadratureGrid quadrature_grid(std::size_t d, std::size_t resolution)
{
    if (d != 2 && d != 3)
        throw Error(ErrorCode::UnsupportedDimension, "quadrature grids exist for d = 2 and d = 3 only");
    if (resolution < 4)
        throw Error(ErrorCode::ArgumentOutOfRange, "quadrature resolution must be at least 4");
    QuadratureGrid g;
    g.dim = d;
    g.directions.reserve(resolution);
    const double res = static_cast<double>(resolution);
    if (d == 2) {
        for (std::size_t k = 0; k < resolution; ++k) {
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / res;
            g.directions.push_back(Direction::angle(theta));
        }
        g.weights.assign(resolution, 2.0 * std::numbers::pi / res);
    } else {
        const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t k = 0; k < resolution; ++k) {
            const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / res;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden_angle * static_cast<double>(k);
            g.directions.push_back(Direction({r * std::cos(phi), r * std::sin(phi), z}));
        }
        g.weights.assign(resolution, 4.0 * std::numbers::pi / res);
    }
    return g;
}

/// Pushforward of mu by x -> v . x, sorted and merged.
inline Measure1D project(const DiscreteMeasure& mu, const Direction& v)
{
    if (mu.dim() != v.dim())
        throw Error(ErrorCode::DimensionMismatch, "direction and measure differ in dimension");
    std::vector<double> values(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        values[i] = dot(mu.point(i), v.values());
    return Measure1D(values, mu.weights());
}

/// Finite set {v_i} with max_i |v_i . x| >= |x| / 2 for every x.
///
/// d = 2: three angles 0, pi/3, 2pi/3 (every line is within pi/6 of one).
/// d >= 3: normalized nonzero sign patterns s in {-1, 0, 1}^d, one per +-pair.
/// For unit x, taking s = sign of the k largest |x_i| gives
/// s . x / sqrt(k) = S_k / sqrt(k) with S_k the top-k sum; if every such ratio
/// were below c then |x|^2 <= c^2 sum_k (sqrt(k) - sqrt(k-1))^2, which is
/// about 1.45 c^2 at d = 6, so c >= 0.83.
inline std::vector<Direction> half_norm_net(std::size_t d)
{
    if (d < 2 || d > 6)
        throw Error(ErrorCode::UnsupportedDimension, "half_norm_net supports 2 <= d <= 6");
    std::vector<Direction> net;
    if (d == 2) {
        for (int k = 0; k < 3; ++k)
            net.push_back(Direction::angle(k * std::numbers::pi / 3.0));
        return net;
    }
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k)
        total *= 3;
    std::vector<double> s(d);
    for (std::size_t code = 1; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t k = 0; k < d; ++k) {
            s[k] = static_cast<double>(c % 3) - 1.0;
            c /= 3;
        }
        // Keep the representative whose last nonzero entry is positive.
        double last = 0.0;
        for (double x : s)
            if (x != 0.0)
                last = x;
        if (last > 0.0)
            net.emplace_back(s);
    }
    return net;
}

/// Smallest max_i |v_i . x| over `samples` random unit x (randomized check of
/// the covering property).
inline double certify_half_norm_net(const std::vector<Direction>& net, std::size_t samples, std::uint64_t seed)
{
    if (net.empty())
        throw Error(ErrorCode::ArgumentOutOfRange, "empty net");
    const auto xs = sample_uniform(net.front().dim(), samples, seed);
    double worst = 1.0;
    for (const auto& x : xs) {
        double best = 0.0;
        for (const auto& v : net)
            best = std::max(best, std::abs(dot(v.values(), x.values())));
        worst = std::min(worst, best);
    }
    return worst;
}

} // namespace projot
