#pragma once

// Exact W_p between finitely supported measures on R^d by solving the
// discrete transport LP with cost |x - y|^p. Equal-size uniform instances go
// through the assignment fast path (an optimal permutation is an optimal plan
// by Birkhoff); everything else through the transportation simplex. The p-th
// root is taken only when reporting.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "detail/assignment.hpp"
#include "detail/transport_simplex.hpp"
#include "error.hpp"
#include "measures.hpp"
#include "ot1d.hpp"

namespace projot {

enum class TransportSolver { automatic, simplex, assignment };

struct TransportPlan {
    std::vector<CouplingEntry> entries;  // positive masses only
    double cost = 0.0;                   // sum mass * |x_i - y_j|^p
    double primal_value = 0.0;           // cost^(1/p)
    double order = 1.0;
};

struct DualCertificate {
    std::vector<double> f;  // on the support of mu, f[0] = 0
    std::vector<double> g;  // on the support of nu
    double dual_value = 0.0;
};

inline constexpr std::size_t max_transport_cells = 50'000'000;

namespace detail {

inline std::vector<double> cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p)
{
    const std::size_t n = mu.size(), m = nu.size(), d = mu.dim();
    std::vector<double> c(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = mu.point(i);
        for (std::size_t j = 0; j < m; ++j) {
            const auto y = nu.point(j);
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double t = x[k] - y[k];
                s += t * t;
            }
            c[i * m + j] = std::pow(std::sqrt(s), p);
        }
    }
    return c;
}

struct TransportSolution {
    TransportPlan plan;
    std::vector<double> u, v;
};

inline bool use_assignment(const DiscreteMeasure& mu, const DiscreteMeasure& nu, TransportSolver solver)
{
    switch (solver) {
    case TransportSolver::simplex: return false;
    case TransportSolver::assignment:
        if (mu.size() != nu.size() || !mu.uniform_weights() || !nu.uniform_weights())
            throw Error(ErrorCode::SolverFailure, "assignment path needs equal-size uniform measures");
        return true;
    case TransportSolver::automatic:
        return mu.size() == nu.size() && mu.size() > 1 && mu.uniform_weights() && nu.uniform_weights();
    }
    return false;
}

inline TransportSolution solve_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                                         TransportSolver solver)
{
    require_order(p);
    if (mu.dim() != nu.dim())
        throw Error(ErrorCode::DimensionMismatch, "measures live in different dimensions");
    const std::size_t n = mu.size(), m = nu.size();
    if (n * m > max_transport_cells)
        throw Error(ErrorCode::ProblemTooLarge, "n * m exceeds the dense solver guard");
    const auto cost = cost_matrix(mu, nu, p);

    TransportSolution out;
    out.plan.order = p;
    CompensatedSum total;
    if (use_assignment(mu, nu, solver)) {
        auto r = solve_assignment(n, cost);
        const double mass = 1.0 / static_cast<double>(n);
        out.plan.entries.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = r.column_of_row[i];
            out.plan.entries.push_back({i, j, mass});
            total.add(mass * cost[i * m + j]);
        }
        out.u = std::move(r.u);
        out.v = std::move(r.v);
    } else {
        TransportSimplex simplex(mu.weights(), nu.weights(), cost);
        auto r = simplex.solve(10 * n * m + 10'000);
        std::sort(r.basis.begin(), r.basis.end(),
                  [](const BasicCell& a, const BasicCell& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
        for (const auto& cell : r.basis) {
            if (cell.flow <= 0.0)
                continue;
            out.plan.entries.push_back({cell.i, cell.j, cell.flow});
            total.add(cell.flow * cost[cell.i * m + cell.j]);
        }
        out.u = std::move(r.u);
        out.v = std::move(r.v);
    }
    out.plan.cost = std::max(0.0, total.value());
    out.plan.primal_value = std::pow(out.plan.cost, 1.0 / p);
    return out;
}

} // namespace detail

inline TransportPlan wasserstein_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                                       TransportSolver solver = TransportSolver::automatic)
{
    return detail::solve_transport(mu, nu, p, solver).plan;
}

/// Optimal LP duals for cost |x - y| with the gauge fixed by f[0] = 0.
inline DualCertificate dual_potentials_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                          TransportSolver solver = TransportSolver::automatic)
{
    auto sol = detail::solve_transport(mu, nu, 1.0, solver);
    const double shift = sol.u.front();
    DualCertificate cert;
    cert.f.resize(sol.u.size());
    cert.g.resize(sol.v.size());
    detail::CompensatedSum value;
    for (std::size_t i = 0; i < sol.u.size(); ++i) {
        cert.f[i] = sol.u[i] - shift;
        value.add(mu.weight(i) * cert.f[i]);
    }
    for (std::size_t j = 0; j < sol.v.size(); ++j) {
        cert.g[j] = sol.v[j] + shift;
        value.add(nu.weight(j) * cert.g[j]);
    }
    cert.dual_value = value.value();
    return cert;
}

/// Largest violation of f_i + g_j <= |x_i - y_j| (<= 0 when feasible).
inline double dual_infeasibility(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const DualCertificate& cert)
{
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < mu.dim(); ++k) {
                const double t = mu.point(i)[k] - nu.point(j)[k];
                s += t * t;
            }
            worst = std::max(worst, cert.f[i] + cert.g[j] - std::sqrt(s));
        }
    return worst;
}

/// |primal - dual| for W_1 from one solve.
inline double duality_gap(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          TransportSolver solver = TransportSolver::automatic)
{
    const auto primal = wasserstein_exact(mu, nu, 1.0, solver);
    const auto dual = dual_potentials_w1(mu, nu, solver);
    return std::abs(primal.primal_value - dual.dual_value);
}

/// Cost of an arbitrary plan under |x - y|^p (no optimality implied).
inline double plan_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const std::vector<CouplingEntry>& plan,
                        double p)
{
    detail::CompensatedSum acc;
    for (const auto& e : plan) {
        double s = 0.0;
        for (std::size_t k = 0; k < mu.dim(); ++k) {
            const double t = mu.point(e.i)[k] - nu.point(e.j)[k];
            s += t * t;
        }
        acc.add(e.mass * std::pow(std::sqrt(s), p));
    }
    return acc.value();
}

/// Plan dump: a `# {json header}` line, then `i,j,mass` rows.
inline void write_plan_csv(std::ostream& out, const TransportPlan& plan,
                           const std::optional<DualCertificate>& dual = std::nullopt)
{
    nlohmann::json header = {{"schema", 1}, {"order", plan.order}, {"primal", plan.primal_value},
                             {"cost", plan.cost}, {"entries", plan.entries.size()}};
    if (dual)
        header["dual"] = dual->dual_value;
    out << "# " << header.dump() << '\n';
    out << "i,j,mass\n";
    const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& e : plan.entries)
        out << e.i << ',' << e.j << ',' << e.mass << '\n';
    out.precision(old_prec);
}

} // namespace projot
