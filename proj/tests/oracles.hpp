#pragma once

// Test-only reference computations. Nothing here calls the iterative solver
// or the discretization code it is used to check.

#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "cellinf/complex.hpp"

namespace oracle {

/// Orthogonal projection of X onto the column span of A via a dense SVD pseudoinverse.
inline Eigen::MatrixXd project(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x)
{
    if (a.cols() == 0)
        return Eigen::MatrixXd::Zero(x.rows(), x.cols());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cutoff = 1e-10 * std::max(1.0, svd.singularValues()(0));
    int rank = 0;
    while (rank < svd.singularValues().size() && svd.singularValues()(rank) > cutoff)
        ++rank;
    const Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
    return u * (u.transpose() * x);
}

inline Eigen::MatrixXd dense_incidence(const cellinf::OrientedGraph& g)
{
    Eigen::MatrixXd b1 = Eigen::MatrixXd::Zero(g.node_count(), g.edge_count());
    for (int e = 0; e < g.edge_count(); ++e) {
        b1(g.edge(e).source, e) = 1.0;
        b1(g.edge(e).target, e) = -1.0;
    }
    return b1;
}

inline Eigen::MatrixXd dense_boundary(const std::vector<cellinf::CellBoundary>& cells, int m)
{
    Eigen::MatrixXd b2 = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(cells.size()));
    for (std::size_t j = 0; j < cells.size(); ++j)
        b2.col(static_cast<Eigen::Index>(j)) = cells[j].dense();
    return b2;
}

/// Harmonic residual of gradient-free F for the given cells, via dense projection.
inline double loss(const std::vector<cellinf::CellBoundary>& cells, const Eigen::MatrixXd& f)
{
    const Eigen::MatrixXd b2 = dense_boundary(cells, static_cast<int>(f.rows()));
    return (f - project(b2, f)).norm();
}

inline Eigen::MatrixXd remove_gradient(const cellinf::OrientedGraph& g, const Eigen::MatrixXd& f)
{
    return f - project(dense_incidence(g).transpose(), f);
}

/// Every simple cycle of a small graph as a sorted edge-id set, found by DFS
/// from each cycle's lowest node.
inline std::vector<std::vector<int>> simple_cycles(const cellinf::OrientedGraph& g)
{
    std::set<std::vector<int>> found;
    const int n = g.node_count();
    std::vector<char> on_path(static_cast<std::size_t>(n), 0);
    std::vector<int> edges;
    std::function<void(int, int)> dfs = [&](int start, int node) {
        for (const auto& [next, e] : g.incident(node)) {
            if (next < start)
                continue;
            if (next == start && edges.size() >= 2 && std::find(edges.begin(), edges.end(), e) == edges.end()) {
                std::vector<int> cycle = edges;
                cycle.push_back(e);
                std::sort(cycle.begin(), cycle.end());
                found.insert(cycle);
                continue;
            }
            if (on_path[next])
                continue;
            on_path[next] = 1;
            edges.push_back(e);
            dfs(start, next);
            edges.pop_back();
            on_path[next] = 0;
        }
    };
    for (int s = 0; s < n; ++s) {
        on_path[s] = 1;
        dfs(s, s);
        on_path[s] = 0;
    }
    return {found.begin(), found.end()};
}

/// Signed boundary of an unordered cycle, built independently of the library
/// by walking the edge set from its first edge.
inline Eigen::VectorXd cycle_vector(const cellinf::OrientedGraph& g, const std::vector<int>& cycle)
{
    Eigen::VectorXd b = Eigen::VectorXd::Zero(g.edge_count());
    std::vector<int> remaining(cycle.begin() + 1, cycle.end());
    const int start = g.edge(cycle[0]).source;
    int node = g.edge(cycle[0]).target;
    b(cycle[0]) = 1.0;
    while (node != start) {
        auto it = std::find_if(remaining.begin(), remaining.end(), [&](int e) {
            return g.edge(e).source == node || g.edge(e).target == node;
        });
        const int e = *it;
        remaining.erase(it);
        b(e) = g.edge(e).source == node ? 1.0 : -1.0;
        node = g.edge(e).source == node ? g.edge(e).target : g.edge(e).source;
    }
    return b;
}

/// Smallest single-cell loss over all simple cycles.
inline double best_single_cycle_loss(const cellinf::OrientedGraph& g, const Eigen::MatrixXd& f_gradient_free)
{
    double best = f_gradient_free.norm();
    for (const auto& cycle : simple_cycles(g)) {
        const Eigen::MatrixXd b = cycle_vector(g, cycle);
        best = std::min(best, (f_gradient_free - project(b, f_gradient_free)).norm());
    }
    return best;
}

}  // namespace oracle
