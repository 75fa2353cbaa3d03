#pragma once

// Transportation simplex (u-v method) on a dense n x m cost matrix.
//
// The basis is a spanning tree of n + m - 1 cells over the bipartite node set
// (rows 0..n-1, columns n..n+m-1), seeded by the north-west-corner rule.
// Entering cell: most negative reduced cost, lowest (i, j) on ties. Leaving
// cell: minimum-flow cell of the cycle's decreasing side, lowest (i, j) on
// ties. After a run of degenerate pivots the entering rule switches to Bland's
// (first negative cell in row-major order) until progress resumes, which rules
// out cycling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "../error.hpp"

namespace projot::detail {

struct BasicCell {
    std::size_t i;
    std::size_t j;
    double flow;
};

struct SimplexResult {
    std::vector<BasicCell> basis;
    std::vector<double> u;  // row potentials, u[0] = 0
    std::vector<double> v;  // column potentials
    std::size_t iterations = 0;
};

class TransportSimplex {
public:
    static constexpr std::size_t degenerate_streak_limit = 50;

    TransportSimplex(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost)
        : n_(supply.size()), m_(demand.size()), cost_(cost), a_(supply), b_(demand)
    {
        if (cost.size() != n_ * m_)
            throw Error(ErrorCode::DimensionMismatch, "cost matrix size does not match marginals");
        double cmax = 0.0;
        for (double c : cost_)
            cmax = std::max(cmax, std::abs(c));
        scale_ = cmax > 0.0 ? cmax : 1.0;
    }

    SimplexResult solve(std::size_t max_iterations)
    {
        north_west_corner();
        const std::size_t nodes = n_ + m_;
        u_.assign(n_, 0.0);
        v_.assign(m_, 0.0);
        parent_node_.assign(nodes, npos);
        parent_cell_.assign(nodes, npos);
        depth_.assign(nodes, 0);

        const double enter_tol = 1e-12 * scale_;
        std::size_t streak = 0;
        std::size_t it = 0;
        for (;; ++it) {
            build_tree();
            const auto [ei, ej] = price(enter_tol, streak >= degenerate_streak_limit);
            if (ei == npos)
                break;
            if (it >= max_iterations)
                throw Error(ErrorCode::SolverFailure, "transportation simplex hit its iteration cap");
            const double theta = pivot(ei, ej);
            streak = theta > 0.0 ? 0 : streak + 1;
        }
        verify(1e-9 * scale_);
        SimplexResult r;
        r.basis = basis_;
        r.u = u_;
        r.v = v_;
        r.iterations = it;
        return r;
    }

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    double c(std::size_t i, std::size_t j) const { return cost_[i * m_ + j]; }

    void north_west_corner()
    {
        std::vector<double> ra(a_.begin(), a_.end()), rb(b_.begin(), b_.end());
        basis_.clear();
        basis_.reserve(n_ + m_ - 1);
        std::size_t i = 0, j = 0;
        while (basis_.size() < n_ + m_ - 1) {
            if (i == n_ - 1 && j == m_ - 1) {
                basis_.push_back({i, j, std::max(0.0, std::min(ra[i], rb[j]))});
                break;
            }
            const double x = std::min(ra[i], rb[j]);
            basis_.push_back({i, j, std::max(0.0, x)});
            ra[i] -= x;
            rb[j] -= x;
            const bool row_done = ra[i] <= rb[j];
            if ((row_done && i < n_ - 1) || j == m_ - 1)
                ++i;
            else
                ++j;
        }
    }

    // BFS from row 0 over basic cells; sets parents, depths and potentials.
    void build_tree()
    {
        const std::size_t nodes = n_ + m_;
        adjacency_.assign(nodes, {});
        for (std::size_t k = 0; k < basis_.size(); ++k) {
            adjacency_[basis_[k].i].push_back(k);
            adjacency_[n_ + basis_[k].j].push_back(k);
        }
        std::fill(parent_node_.begin(), parent_node_.end(), npos);
        queue_.clear();
        queue_.push_back(0);
        parent_node_[0] = 0;
        parent_cell_[0] = npos;
        depth_[0] = 0;
        u_[0] = 0.0;
        for (std::size_t head = 0; head < queue_.size(); ++head) {
            const std::size_t node = queue_[head];
            for (std::size_t k : adjacency_[node]) {
                const auto& cell = basis_[k];
                const std::size_t other = node < n_ ? n_ + cell.j : cell.i;
                if (parent_node_[other] != npos)
                    continue;
                parent_node_[other] = node;
                parent_cell_[other] = k;
                depth_[other] = depth_[node] + 1;
                if (other >= n_)
                    v_[cell.j] = c(cell.i, cell.j) - u_[cell.i];
                else
                    u_[cell.i] = c(cell.i, cell.j) - v_[cell.j];
                queue_.push_back(other);
            }
        }
        if (queue_.size() != nodes)
            throw Error(ErrorCode::SolverFailure, "basis is not a spanning tree");
    }

    std::pair<std::size_t, std::size_t> price(double tol, bool bland) const
    {
        std::size_t bi = npos, bj = npos;
        double best = -tol;
        for (std::size_t i = 0; i < n_; ++i) {
            const double* row = cost_.data() + i * m_;
            const double ui = u_[i];
            for (std::size_t j = 0; j < m_; ++j) {
                const double r = row[j] - ui - v_[j];
                if (r < best) {
                    bi = i;
                    bj = j;
                    if (bland)
                        return {bi, bj};
                    best = r;
                }
            }
        }
        return {bi, bj};
    }

    // Returns theta; replaces the leaving cell with (ei, ej).
    double pivot(std::size_t ei, std::size_t ej)
    {
        std::size_t a = ei, b = n_ + ej;
        path_a_.clear();
        path_b_.clear();
        while (depth_[a] > depth_[b]) {
            path_a_.push_back(parent_cell_[a]);
            a = parent_node_[a];
        }
        while (depth_[b] > depth_[a]) {
            path_b_.push_back(parent_cell_[b]);
            b = parent_node_[b];
        }
        while (a != b) {
            path_a_.push_back(parent_cell_[a]);
            a = parent_node_[a];
            path_b_.push_back(parent_cell_[b]);
            b = parent_node_[b];
        }
        // Cycle after the entering cell: column side first, then the row side
        // reversed. Signs alternate starting with a decrease.
        cycle_.assign(path_b_.begin(), path_b_.end());
        cycle_.insert(cycle_.end(), path_a_.rbegin(), path_a_.rend());

        std::size_t leave = npos;
        double theta = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cycle_.size(); k += 2) {
            const auto& cell = basis_[cycle_[k]];
            const bool better = cell.flow < theta ||
                                (cell.flow == theta && (cell.i < basis_[leave].i ||
                                                        (cell.i == basis_[leave].i && cell.j < basis_[leave].j)));
            if (better) {
                theta = cell.flow;
                leave = cycle_[k];
            }
        }
        for (std::size_t k = 0; k < cycle_.size(); ++k) {
            auto& cell = basis_[cycle_[k]];
            if (cycle_[k] == leave)
                continue;
            cell.flow = (k % 2 == 0) ? std::max(0.0, cell.flow - theta) : cell.flow + theta;
        }
        basis_[leave] = {ei, ej, theta};
        return theta;
    }

    void verify(double tol)
    {
        build_tree();
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < m_; ++j)
                if (c(i, j) - u_[i] - v_[j] < -tol)
                    throw Error(ErrorCode::SolverFailure, "complementary slackness check failed");
        for (const auto& cell : basis_)
            if (cell.flow < 0.0)
                throw Error(ErrorCode::SolverFailure, "negative flow in final basis");
    }

    std::size_t n_, m_;
    std::span<const double> cost_;
    std::span<const double> a_, b_;
    double scale_ = 1.0;

    std::vector<BasicCell> basis_;
    std::vector<double> u_, v_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<std::size_t> parent_node_, parent_cell_, depth_, queue_;
    std::vector<std::size_t> path_a_, path_b_, cycle_;
};

} // namespace projot::detail
