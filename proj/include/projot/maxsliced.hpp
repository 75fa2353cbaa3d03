#pragma once

// Max-sliced Wasserstein distance: sup over unit v of W_p(mu_v, nu_v).
//
// Heuristic mode: multi-start projected (sub)gradient ascent on W_p^p.
// Certified mode (d = 2, 3): branch-and-bound over sphere patches. The
// objective is even in v, so only a half circle / upper hemisphere is
// searched.
//
// Patch bound. Let pi_c be the monotone coupling at the patch center c, lifted
// to the original atoms. For any v, the image of pi_c under (x, y) -> (v.x, v.y)
// couples mu_v and nu_v, so
//     W_p(mu_v, nu_v) <= |(v . (x - y))|_{L^p(pi_c)}
//                     <= W_p(mu_c, nu_c) + |v - c| * |x - y|_{L^p(pi_c)}
// by Minkowski and Cauchy-Schwarz. The global Lipschitz constant
// L = M_p(mu - m) + M_p(nu - m) also applies; each patch uses the smaller of
// the two constants times its chordal radius.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <queue>
#include <span>
#include <vector>

#include "error.hpp"
#include "measures.hpp"
#include "ot1d.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sliced.hpp"
#include "sphere.hpp"

namespace projot {

enum class SearchMode { heuristic, certified };

struct DirectionResult {
    Direction v_star;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t evaluations = 0;
    SearchMode mode = SearchMode::heuristic;
    bool budget_exceeded = false;
};

struct AscentResult {
    Direction v;
    double value = 0.0;  // W_p(mu_v, nu_v)
    std::size_t evaluations = 0;
};

/// Backtracking ascent along great circles. The trial step is an angle:
/// accepted steps double it (capped at pi/2), rejected steps halve it.
struct AscentOptions {
    std::size_t max_iters = 200;
    double initial_step = 0.5;
    double min_step = 1e-12;
};

struct ProjectedGradient {
    double value_pow = 0.0;         // sum over the coupling of mass |v.(x - y)|^p
    double coupling_norm = 0.0;     // (sum mass |x - y|^p)^(1/p)
    std::vector<double> gradient;   // Euclidean gradient in R^d
};

namespace detail {

/// Monotone coupling of the projections of mu and nu along `v`, expressed in
/// original atom indices. Ties in projected value are broken by index.
class IndexCoupling {
public:
    void build(const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::span<const double> v)
    {
        sort_projected(mu, v, order_a_, proj_a_, cum_a_);
        sort_projected(nu, v, order_b_, proj_b_, cum_b_);
        entries_.clear();
        sweep_breakpoints(cum_a_, cum_b_, [&](std::size_t i, std::size_t j, double dt) {
            entries_.push_back({order_a_[i], order_b_[j], dt});
        });
    }

    const std::vector<CouplingEntry>& entries() const noexcept { return entries_; }

private:
    static void sort_projected(const DiscreteMeasure& m, std::span<const double> v, std::vector<std::size_t>& order,
                               std::vector<double>& proj, std::vector<double>& cum)
    {
        const std::size_t n = m.size();
        proj.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            proj[i] = dot(m.point(i), v);
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return proj[a] < proj[b] || (proj[a] == proj[b] && a < b);
        });
        cum.resize(n);
        CompensatedSum acc;
        for (std::size_t k = 0; k < n; ++k) {
            acc.add(m.weight(order[k]));
            cum[k] = acc.value();
        }
        cum.back() = 1.0;
    }

    std::vector<std::size_t> order_a_, order_b_;
    std::vector<double> proj_a_, proj_b_, cum_a_, cum_b_;
    std::vector<CouplingEntry> entries_;
};

inline ProjectedGradient gradient_from_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                std::span<const double> v, double p,
                                                const std::vector<CouplingEntry>& coupling)
{
    const std::size_t d = mu.dim();
    ProjectedGradient out;
    out.gradient.assign(d, 0.0);
    CompensatedSum value, norm_pow;
    std::vector<double> delta(d);
    for (const auto& e : coupling) {
        double s = 0.0, len2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            delta[k] = mu.point(e.i)[k] - nu.point(e.j)[k];
            s += v[k] * delta[k];
            len2 += delta[k] * delta[k];
        }
        const double as = std::abs(s);
        value.add(e.mass * std::pow(as, p));
        norm_pow.add(e.mass * std::pow(std::sqrt(len2), p));
        if (as == 0.0)
            continue;
        const double coef = e.mass * p * std::pow(as, p - 1.0) * (s > 0.0 ? 1.0 : -1.0);
        for (std::size_t k = 0; k < d; ++k)
            out.gradient[k] += coef * delta[k];
    }
    out.value_pow = std::max(0.0, value.value());
    out.coupling_norm = std::pow(std::max(0.0, norm_pow.value()), 1.0 / p);
    return out;
}

} // namespace detail

/// Value and Euclidean gradient of v -> W_p(mu_v, nu_v)^p for the monotone
/// coupling at v. `v` need not be unit length; the formula is the gradient
/// of sum mass |v . (x_i - y_j)|^p with the coupling held fixed, a valid
/// supergradient element at coupling ties.
inline ProjectedGradient projected_subgradient(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                                               std::span<const double> v)
{
    detail::check_pair(mu, nu, p);
    if (v.size() != mu.dim())
        throw Error(ErrorCode::DimensionMismatch, "direction and measures differ in dimension");
    detail::IndexCoupling coupling;
    coupling.build(mu, nu, v);
    return detail::gradient_from_coupling(mu, nu, v, p, coupling.entries());
}

inline AscentResult direction_ascent(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                                     const Direction& v0, const AscentOptions& opts = {})
{
    detail::check_pair(mu, nu, p);
    if (v0.dim() != mu.dim())
        throw Error(ErrorCode::DimensionMismatch, "start direction and measures differ in dimension");
    const std::size_t d = mu.dim();
    if (d == 1)
        return {v0, projected_distance(mu, nu, v0, p), 1};

    detail::IndexCoupling coupling;
    auto eval = [&](std::span<const double> v) {
        coupling.build(mu, nu, v);
        return detail::gradient_from_coupling(mu, nu, v, p, coupling.entries());
    };

    std::vector<double> v(v0.values().begin(), v0.values().end());
    auto cur = eval(v);
    std::size_t evaluations = 1;
    double step = opts.initial_step;
    std::vector<double> tangent(d), trial(d);
    for (std::size_t it = 0; it < opts.max_iters && step >= opts.min_step; ++it) {
        const double radial = dot(cur.gradient, v);
        double tnorm = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            tangent[k] = cur.gradient[k] - radial * v[k];
            tnorm += tangent[k] * tangent[k];
        }
        tnorm = std::sqrt(tnorm);
        if (!(tnorm > 1e-300))
            break;
        bool accepted = false;
        while (step >= opts.min_step) {
            const double cs = std::cos(step), sn = std::sin(step);
            for (std::size_t k = 0; k < d; ++k)
                trial[k] = cs * v[k] + sn * tangent[k] / tnorm;
            const double r = norm(trial);
            for (double& x : trial)
                x /= r;
            auto next = eval(trial);
            ++evaluations;
            if (next.value_pow > cur.value_pow) {
                v = trial;
                cur = std::move(next);
                step = std::min(2.0 * step, std::numbers::pi / 2.0);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            break;
    }
    Direction best(v);
    return {best, projected_distance(mu, nu, best, p), evaluations};
}

struct MaxSlicedOptions {
    AscentOptions ascent;
    std::size_t threads = 1;
};

/// Best of `starts` ascents from uniform random directions plus ascents from
/// the 2d signed axes. `lower` is a value actually attained; `upper` equals
/// `lower` since no certificate is produced.
inline DirectionResult max_sliced(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p, std::size_t starts,
                                  std::uint64_t seed, const MaxSlicedOptions& opts = {})
{
    detail::check_pair(mu, nu, p);
    if (starts < 1)
        throw Error(ErrorCode::ArgumentOutOfRange, "max_sliced needs at least one start");
    const std::size_t d = mu.dim();
    std::vector<Direction> inits = sample_uniform(d, starts, seed);
    for (std::size_t k = 0; k < d; ++k) {
        inits.push_back(Direction::axis(d, k, 1.0));
        inits.push_back(Direction::axis(d, k, -1.0));
    }
    std::vector<AscentResult> runs(inits.size(), AscentResult{inits.front(), 0.0, 0});
    parallel_for(inits.size(), opts.threads,
                 [&](std::size_t k) { runs[k] = direction_ascent(mu, nu, p, inits[k], opts.ascent); });
    std::size_t best = 0, evaluations = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        evaluations += runs[k].evaluations;
        if (runs[k].value > runs[best].value)
            best = k;
    }
    return {runs[best].v, runs[best].value, runs[best].value, evaluations, SearchMode::heuristic, false};
}

struct CertifiedOptions {
    std::size_t max_evaluations = 4'000'000;
    std::size_t warm_starts = 4;  // heuristic ascents seeding the incumbent
    std::uint64_t seed = 0;
};

namespace detail {

struct Patch {
    double bound;
    std::uint64_t id;
    std::array<std::array<double, 3>, 3> corner;  // d = 2 uses corner[0][0], corner[1][0] as angles
};

struct PatchOrder {
    bool operator()(const Patch& a, const Patch& b) const
    {
        // max-heap on bound, lower id first among equal bounds
        return a.bound < b.bound || (a.bound == b.bound && a.id > b.id);
    }
};

inline std::array<double, 3> unit_mid(const std::array<double, 3>& a, const std::array<double, 3>& b)
{
    std::array<double, 3> m{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
    const double r = std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
    for (double& x : m)
        x /= r;
    return m;
}

} // namespace detail

/// Certified enclosure [lower, upper] of maxSW_p with upper - lower <= tol
/// unless the evaluation budget runs out (then `budget_exceeded` is set and
/// the best bracket so far is returned). d = 1 is exact; d in {2, 3} runs
/// branch-and-bound; other dimensions are unsupported.
inline DirectionResult max_sliced_certified(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                                            double tol, const CertifiedOptions& opts = {})
{
    detail::check_pair(mu, nu, p);
    if (!(tol > 0.0))
        throw Error(ErrorCode::ArgumentOutOfRange, "tolerance must be positive");
    const std::size_t d = mu.dim();
    if (d == 1) {
        const Direction e = Direction::axis(1, 0);
        const double w = projected_distance(mu, nu, e, p);
        return {e, w, w, 1, SearchMode::certified, false};
    }
    if (d != 2 && d != 3)
        throw Error(ErrorCode::UnsupportedDimension, "certified search supports d = 2 and d = 3");

    const double lipschitz = projection_lipschitz(mu, nu, p);
    DirectionResult res = max_sliced(mu, nu, p, std::max<std::size_t>(1, opts.warm_starts), opts.seed);
    res.mode = SearchMode::certified;

    detail::IndexCoupling coupling;
    std::vector<double> center(d);
    std::array<std::array<double, 3>, 3> corners{};
    // Bound on a patch given its center, chord radius, its corners and the
    // distance from the origin to the flat simplex spanned by the corners.
    // Two valid bounds are combined:
    //  * first order: W(c) + radius * min(L, ||x - y||_{L^p(pi_c)});
    //  * convex: with the center coupling pi_c fixed, G(u) = ||u . (x - y)||_{L^p(pi_c)}
    //    dominates W(u / |u|) |u|, is convex and 1-homogeneous, and the patch is
    //    the radial image of the flat simplex, so W <= max_k G(corner_k) / plane_dist.
    auto bound_at = [&](double radius, std::size_t n_corners, double plane_dist) {
        coupling.build(mu, nu, center);
        const auto g = detail::gradient_from_coupling(mu, nu, center, p, coupling.entries());
        const double exact = projected_distance(mu, nu, Direction(center), p);
        ++res.evaluations;
        if (exact > res.lower) {
            res.lower = exact;
            res.v_star = Direction(center);
        }
        const double at_center = std::max(exact, std::pow(g.value_pow, 1.0 / p));
        const double first_order = at_center + radius * std::min(lipschitz, g.coupling_norm);
        double corner_max = 0.0;
        for (std::size_t k = 0; k < n_corners; ++k) {
            detail::CompensatedSum acc;
            for (const auto& e : coupling.entries()) {
                double s = 0.0;
                for (std::size_t i = 0; i < d; ++i)
                    s += corners[k][i] * (mu.point(e.i)[i] - nu.point(e.j)[i]);
                acc.add(e.mass * std::pow(std::abs(s), p));
            }
            corner_max = std::max(corner_max, std::pow(std::max(0.0, acc.value()), 1.0 / p));
        }
        // relative guard against rounding in the corner sums
        const double convex = plane_dist > 0.0 ? corner_max / plane_dist * (1.0 + 1e-12) : first_order;
        return std::min(first_order, convex);
    };

    std::priority_queue<detail::Patch, std::vector<detail::Patch>, detail::PatchOrder> heap;
    std::uint64_t next_id = 0;
    auto push_interval = [&](double a, double b) {
        const double mid = 0.5 * (a + b);
        center[0] = std::cos(mid);
        center[1] = std::sin(mid);
        corners[0] = {std::cos(a), std::sin(a), 0.0};
        corners[1] = {std::cos(b), std::sin(b), 0.0};
        detail::Patch patch{bound_at(2.0 * std::sin(0.25 * (b - a)), 2, std::cos(0.5 * (b - a))), next_id++, {}};
        patch.corner[0][0] = a;
        patch.corner[1][0] = b;
        if (patch.bound > res.lower)
            heap.push(patch);
    };
    auto push_triangle = [&](const std::array<double, 3>& a, const std::array<double, 3>& b,
                             const std::array<double, 3>& c) {
        std::array<double, 3> m{a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]};
        const double r = std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
        double radius = 0.0;
        for (int k = 0; k < 3; ++k)
            center[k] = m[k] / r;
        for (const auto* q : {&a, &b, &c}) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += ((*q)[k] - center[k]) * ((*q)[k] - center[k]);
            radius = std::max(radius, std::sqrt(s));
        }
        // distance from the origin to the plane through a, b, c
        const std::array<double, 3> e1{b[0] - a[0], b[1] - a[1], b[2] - a[2]}, e2{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
        const std::array<double, 3> nrm{e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                                        e1[0] * e2[1] - e1[1] * e2[0]};
        const double nlen = std::sqrt(nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]);
        const double plane_dist = nlen > 0.0 ? std::abs(nrm[0] * a[0] + nrm[1] * a[1] + nrm[2] * a[2]) / nlen : 0.0;
        corners = {a, b, c};
        detail::Patch patch{bound_at(radius, 3, plane_dist), next_id++, {a, b, c}};
        if (patch.bound > res.lower)
            heap.push(patch);
    };

    if (d == 2) {
        const int pieces = 8;
        for (int k = 0; k < pieces; ++k)
            push_interval(std::numbers::pi * k / pieces, std::numbers::pi * (k + 1) / pieces);
    } else {
        const std::array<double, 3> ex{1, 0, 0}, ey{0, 1, 0}, mx{-1, 0, 0}, my{0, -1, 0}, ez{0, 0, 1};
        push_triangle(ex, ey, ez);
        push_triangle(ey, mx, ez);
        push_triangle(mx, my, ez);
        push_triangle(my, ex, ez);
    }

    while (!heap.empty()) {
        const detail::Patch top = heap.top();
        if (top.bound <= res.lower + tol)
            break;
        if (res.evaluations >= opts.max_evaluations) {
            res.budget_exceeded = true;
            break;
        }
        heap.pop();
        if (d == 2) {
            const double a = top.corner[0][0], b = top.corner[1][0], mid = 0.5 * (a + b);
            push_interval(a, mid);
            push_interval(mid, b);
        } else {
            const auto& [a, b, c] = top.corner;
            const auto ab = detail::unit_mid(a, b), bc = detail::unit_mid(b, c), ca = detail::unit_mid(c, a);
            push_triangle(a, ab, ca);
            push_triangle(ab, b, bc);
            push_triangle(ca, bc, c);
            push_triangle(ab, bc, ca);
        }
    }
    res.upper = heap.empty() ? res.lower : std::max(res.lower, heap.top().bound);
    return res;
}

} // namespace projot
