#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace projot {

namespace detail {

/// Neumaier summation; keeps cumulative weights accurate on long supports.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace detail

/// Finitely supported probability measure on R^d. Points are stored row-major.
/// Immutable after construction; duplicate points are kept as separate atoms.
class DiscreteMeasure {
public:
    static constexpr double weight_sum_tolerance = 1e-9;

    DiscreteMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights)
        : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights))
    {
        if (dim_ == 0)
            throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
        if (weights_.empty())
            throw Error(ErrorCode::EmptySupport, "measure needs at least one atom");
        if (coords_.size() != dim_ * weights_.size())
            throw Error(ErrorCode::DimensionMismatch, "coordinate count does not match dim * weights");
        for (double c : coords_)
            if (!std::isfinite(c))
                throw Error(ErrorCode::NonFiniteValue, "non-finite coordinate");
        detail::CompensatedSum total;
        for (double w : weights_) {
            if (!std::isfinite(w))
                throw Error(ErrorCode::NonFiniteValue, "non-finite weight");
            if (w < 0.0)
                throw Error(ErrorCode::NegativeWeight, "weights must be nonnegative");
            total.add(w);
        }
        const double s = total.value();
        if (std::abs(s - 1.0) > weight_sum_tolerance)
            throw Error(ErrorCode::WeightSumOutOfRange, "weights sum to " + std::to_string(s));
        if (s != 1.0)
            for (double& w : weights_)
                w /= s;
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return weights_.size(); }

    std::span<const double> point(std::size_t i) const noexcept
    {
        return {coords_.data() + i * dim_, dim_};
    }
    double weight(std::size_t i) const noexcept { return weights_[i]; }

    std::span<const double> coords() const noexcept { return coords_; }
    std::span<const double> weights() const noexcept { return weights_; }

    bool uniform_weights(double rel_tol = 1e-12) const noexcept
    {
        const double target = 1.0 / static_cast<double>(size());
        for (double w : weights_)
            if (std::abs(w - target) > rel_tol * target)
                return false;
        return true;
    }

    friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

private:
    std::size_t dim_;
    std::vector<double> coords_;
    std::vector<double> weights_;
};

/// Builds a measure from per-atom coordinate lists.
inline DiscreteMeasure make_discrete(const std::vector<std::vector<double>>& points,
                                     const std::vector<double>& weights)
{
    if (points.empty() || weights.empty())
        throw Error(ErrorCode::EmptySupport, "measure needs at least one atom");
    if (points.size() != weights.size())
        throw Error(ErrorCode::DimensionMismatch, "points and weights differ in length");
    const std::size_t dim = points.front().size();
    std::vector<double> coords;
    coords.reserve(dim * points.size());
    for (const auto& p : points) {
        if (p.size() != dim)
            throw Error(ErrorCode::DimensionMismatch, "points have inconsistent dimension");
        coords.insert(coords.end(), p.begin(), p.end());
    }
    return DiscreteMeasure(dim, std::move(coords), weights);
}

/// Uniform weights 1/n.
inline DiscreteMeasure make_discrete(const std::vector<std::vector<double>>& points)
{
    const std::size_t n = points.size();
    return make_discrete(points, std::vector<double>(n, n ? 1.0 / static_cast<double>(n) : 0.0));
}

inline DiscreteMeasure dirac(std::vector<double> x)
{
    const std::size_t dim = x.size();
    return DiscreteMeasure(dim, std::move(x), {1.0});
}

inline double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += a[k] * b[k];
    return s;
}

inline double norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

/// M_p(mu) = (sum_i w_i |x_i|^p)^(1/p), Euclidean norm.
inline double moment_p(const DiscreteMeasure& mu, double p)
{
    detail::require_order(p);
    detail::CompensatedSum acc;
    for (std::size_t i = 0; i < mu.size(); ++i)
        acc.add(mu.weight(i) * std::pow(norm(mu.point(i)), p));
    return std::pow(acc.value(), 1.0 / p);
}

/// Pushforward of mu by a pointwise map R^d -> R^k.
inline DiscreteMeasure pushforward(const DiscreteMeasure& mu, std::size_t out_dim,
                                   const std::function<void(std::span<const double>, std::span<double>)>& map)
{
    std::vector<double> coords(out_dim * mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        map(mu.point(i), std::span<double>(coords.data() + i * out_dim, out_dim));
    return DiscreteMeasure(out_dim, std::move(coords), {mu.weights().begin(), mu.weights().end()});
}

inline DiscreteMeasure translate(const DiscreteMeasure& mu, std::span<const double> shift)
{
    if (shift.size() != mu.dim())
        throw Error(ErrorCode::DimensionMismatch, "shift has wrong dimension");
    return pushforward(mu, mu.dim(), [&](std::span<const double> x, std::span<double> y) {
        for (std::size_t k = 0; k < x.size(); ++k)
            y[k] = x[k] + shift[k];
    });
}

inline DiscreteMeasure scale(const DiscreteMeasure& mu, double s)
{
    return pushforward(mu, mu.dim(), [&](std::span<const double> x, std::span<double> y) {
        for (std::size_t k = 0; k < x.size(); ++k)
            y[k] = s * x[k];
    });
}

/// Weighted mixture lambda * mu + (1 - lambda) * nu, atoms concatenated.
inline DiscreteMeasure mixture(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double lambda)
{
    if (mu.dim() != nu.dim())
        throw Error(ErrorCode::DimensionMismatch, "mixture of measures in different dimensions");
    std::vector<double> coords(mu.coords().begin(), mu.coords().end());
    coords.insert(coords.end(), nu.coords().begin(), nu.coords().end());
    std::vector<double> w;
    w.reserve(mu.size() + nu.size());
    for (double x : mu.weights())
        w.push_back(lambda * x);
    for (double x : nu.weights())
        w.push_back((1.0 - lambda) * x);
    return DiscreteMeasure(mu.dim(), std::move(coords), std::move(w));
}

/// Optional canonicalization: merges exactly equal points, summing weights.
/// Atoms keep the order of their first occurrence.
inline DiscreteMeasure merge_duplicates(const DiscreteMeasure& mu)
{
    std::vector<double> coords;
    std::vector<double> w;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const auto p = mu.point(i);
        bool merged = false;
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (std::equal(p.begin(), p.end(), coords.begin() + static_cast<std::ptrdiff_t>(j * mu.dim()))) {
                w[j] += mu.weight(i);
                merged = true;
                break;
            }
        }
        if (!merged) {
            coords.insert(coords.end(), p.begin(), p.end());
            w.push_back(mu.weight(i));
        }
    }
    return DiscreteMeasure(mu.dim(), std::move(coords), std::move(w));
}

// ---------------------------------------------------------------------------
// Seeded generators

enum class GeneratorKind { uniform_cube, standard_gaussian, two_point, empirical_of };

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::uniform_cube;
    std::size_t dim = 1;
    double side = 1.0;                  // uniform_cube edge length, cube anchored at the origin
    std::vector<double> x, y;           // two_point locations
    GeneratorKind base = GeneratorKind::uniform_cube;  // law sampled by empirical_of
    std::size_t count = 0;              // empirical_of sample size

    static GeneratorSpec uniform_cube(std::size_t dim, double side = 1.0)
    {
        GeneratorSpec s;
        s.kind = GeneratorKind::uniform_cube;
        s.dim = dim;
        s.side = side;
        return s;
    }
    static GeneratorSpec standard_gaussian(std::size_t dim)
    {
        GeneratorSpec s;
        s.kind = GeneratorKind::standard_gaussian;
        s.dim = dim;
        return s;
    }
    static GeneratorSpec two_point(std::vector<double> x, std::vector<double> y)
    {
        GeneratorSpec s;
        s.kind = GeneratorKind::two_point;
        s.dim = x.size();
        s.x = std::move(x);
        s.y = std::move(y);
        return s;
    }
    static GeneratorSpec empirical_of(const GeneratorSpec& law, std::size_t n)
    {
        GeneratorSpec s = law;
        s.kind = GeneratorKind::empirical_of;
        s.base = law.kind;
        s.count = n;
        return s;
    }
};

namespace detail {

inline void sample_law(const GeneratorSpec& spec, GeneratorKind law, SplitMix64& rng, std::span<double> out)
{
    switch (law) {
    case GeneratorKind::uniform_cube:
        for (double& c : out)
            c = spec.side * rng.uniform();
        return;
    case GeneratorKind::standard_gaussian:
        for (double& c : out)
            c = rng.normal();
        return;
    default:
        throw Error(ErrorCode::InvalidSpec, "empirical_of needs a continuous base law");
    }
}

} // namespace detail

/// Deterministic in (spec, seed). Continuous laws are only reachable through
/// empirical_of; requesting them bare is an InvalidSpec.
inline DiscreteMeasure generate(const GeneratorSpec& spec, std::uint64_t seed)
{
    if (spec.dim == 0)
        throw Error(ErrorCode::InvalidSpec, "dimension must be positive");
    switch (spec.kind) {
    case GeneratorKind::two_point: {
        if (spec.x.size() != spec.dim || spec.y.size() != spec.dim)
            throw Error(ErrorCode::InvalidSpec, "two_point locations must have dim coordinates");
        std::vector<double> coords(spec.x);
        coords.insert(coords.end(), spec.y.begin(), spec.y.end());
        return DiscreteMeasure(spec.dim, std::move(coords), {0.5, 0.5});
    }
    case GeneratorKind::empirical_of: {
        if (spec.count == 0)
            throw Error(ErrorCode::InvalidSpec, "empirical_of needs a positive sample count");
        if (spec.base == GeneratorKind::uniform_cube && !(spec.side > 0.0))
            throw Error(ErrorCode::InvalidSpec, "cube side must be positive");
        SplitMix64 rng(seed);
        std::vector<double> coords(spec.dim * spec.count);
        detail::sample_law(spec, spec.base, rng, coords);
        return DiscreteMeasure(spec.dim, std::move(coords),
                               std::vector<double>(spec.count, 1.0 / static_cast<double>(spec.count)));
    }
    default:
        throw Error(ErrorCode::InvalidSpec, "continuous law cannot be materialized; wrap it in empirical_of");
    }
}

/// Gaussian cloud of n atoms with random (exponential, normalized) weights,
/// scaled by `spread`. The workhorse instance family for audits.
inline DiscreteMeasure random_cloud(std::size_t dim, std::size_t n, SplitMix64& rng, double spread = 1.0,
                                    bool weighted = true)
{
    if (dim == 0 || n == 0)
        throw Error(ErrorCode::InvalidSpec, "random_cloud needs positive dim and n");
    std::vector<double> coords(dim * n);
    for (double& c : coords)
        c = spread * rng.normal();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    if (weighted) {
        detail::CompensatedSum total;
        for (double& x : w) {
            x = -std::log(rng.uniform_open_low());
            total.add(x);
        }
        const double s = total.value();
        for (double& x : w)
            x /= s;
    }
    return DiscreteMeasure(dim, std::move(coords), std::move(w));
}

} // namespace projot
