#pragma once

// Exact one-dimensional transport through quantile functions.
//
// The quantile convention is the right-continuous inverse
//     F^{-1}(t) = inf { x : mu((-inf, x]) > t },   0 <= t < 1,
// so on [cum[i-1], cum[i]) the quantile is atom i. W_p is evaluated by
// sweeping the merged breakpoints of both cumulative-weight sequences; the
// integrand is constant between consecutive breakpoints.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "error.hpp"
#include "measures.hpp"

namespace projot {

class Measure1D {
public:
    /// Sorts, merges equal atoms and accumulates weights. Weights must already
    /// be a probability vector (checked to 1e-9 like DiscreteMeasure).
    Measure1D(std::span<const double> values, std::span<const double> weights)
    {
        if (values.empty())
            throw Error(ErrorCode::EmptySupport, "1D measure needs at least one atom");
        if (values.size() != weights.size())
            throw Error(ErrorCode::DimensionMismatch, "values and weights differ in length");
        std::vector<std::size_t> order(values.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        for (std::size_t k : order) {
            if (!std::isfinite(values[k]) || !std::isfinite(weights[k]))
                throw Error(ErrorCode::NonFiniteValue, "non-finite atom or weight");
            if (weights[k] < 0.0)
                throw Error(ErrorCode::NegativeWeight, "weights must be nonnegative");
            if (!atoms_.empty() && atoms_.back() == values[k])
                weights_.back() += weights[k];
            else {
                atoms_.push_back(values[k]);
                weights_.push_back(weights[k]);
            }
        }
        cum_.resize(weights_.size());
        detail::CompensatedSum acc;
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            acc.add(weights_[i]);
            cum_[i] = acc.value();
        }
        if (std::abs(cum_.back() - 1.0) > DiscreteMeasure::weight_sum_tolerance)
            throw Error(ErrorCode::WeightSumOutOfRange, "1D weights do not sum to 1");
        // Pin the total so both breakpoint sweeps end together.
        cum_.back() = 1.0;
    }

    std::size_t size() const noexcept { return atoms_.size(); }
    std::span<const double> atoms() const noexcept { return atoms_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<const double> cum() const noexcept { return cum_; }

private:
    std::vector<double> atoms_;
    std::vector<double> weights_;
    std::vector<double> cum_;
};

inline Measure1D to_measure1d(const DiscreteMeasure& mu)
{
    if (mu.dim() != 1)
        throw Error(ErrorCode::DimensionMismatch, "to_measure1d needs a one-dimensional measure");
    return Measure1D(mu.coords(), mu.weights());
}

inline double quantile(const Measure1D& m, double t)
{
    if (!(t >= 0.0 && t < 1.0))
        throw Error(ErrorCode::ArgumentOutOfRange, "quantile level must lie in [0, 1)");
    const auto cum = m.cum();
    const auto it = std::upper_bound(cum.begin(), cum.end(), t);
    const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cum.begin(),
                                                                      static_cast<std::ptrdiff_t>(m.size()) - 1));
    return m.atoms()[idx];
}

struct CouplingEntry {
    std::size_t i;
    std::size_t j;
    double mass;

    friend bool operator==(const CouplingEntry&, const CouplingEntry&) = default;
};

using MonotoneCoupling = std::vector<CouplingEntry>;

namespace detail {

/// Visits (i, j, dt) for each maximal interval of [0,1) on which the two
/// quantile functions equal atoms i and j respectively.
template <class Visit>
void sweep_breakpoints(std::span<const double> cum_a, std::span<const double> cum_b, Visit&& visit)
{
    std::size_t i = 0, j = 0;
    double t = 0.0;
    const std::size_t na = cum_a.size(), nb = cum_b.size();
    while (i < na && j < nb) {
        const double next = std::min(cum_a[i], cum_b[j]);
        if (next > t) {
            visit(i, j, next - t);
            t = next;
        }
        const bool adv_a = cum_a[i] <= next;
        const bool adv_b = cum_b[j] <= next;
        if (adv_a)
            ++i;
        if (adv_b)
            ++j;
    }
}

} // namespace detail

/// (integral_0^1 |F_mu^{-1}(t) - F_nu^{-1}(t)|^p dt)^(1/p), exact.
inline double wasserstein_1d_pow(const Measure1D& mu, const Measure1D& nu, double p)
{
    detail::require_order(p);
    const auto a = mu.atoms();
    const auto b = nu.atoms();
    detail::CompensatedSum acc;
    detail::sweep_breakpoints(mu.cum(), nu.cum(), [&](std::size_t i, std::size_t j, double dt) {
        acc.add(dt * std::pow(std::abs(a[i] - b[j]), p));
    });
    return std::max(acc.value(), 0.0);
}

inline double wasserstein_1d(const Measure1D& mu, const Measure1D& nu, double p)
{
    return std::pow(wasserstein_1d_pow(mu, nu, p), 1.0 / p);
}

/// North-west-corner sweep over sorted atoms; masses are the breakpoint gaps.
inline MonotoneCoupling monotone_coupling(const Measure1D& mu, const Measure1D& nu)
{
    MonotoneCoupling out;
    out.reserve(mu.size() + nu.size());
    detail::sweep_breakpoints(mu.cum(), nu.cum(),
                              [&](std::size_t i, std::size_t j, double dt) { out.push_back({i, j, dt}); });
    return out;
}

inline double coupling_cost(const Measure1D& mu, const Measure1D& nu, const MonotoneCoupling& plan, double p)
{
    detail::CompensatedSum acc;
    for (const auto& e : plan)
        acc.add(e.mass * std::pow(std::abs(mu.atoms()[e.i] - nu.atoms()[e.j]), p));
    return acc.value();
}

} // namespace projot
