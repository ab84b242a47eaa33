#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cellinf/complex.hpp"
#include "cellinf/random.hpp"
#include "cellinf/union_find.hpp"

namespace cellinf {

/// Greedy forest over edges taken in the given order; returns sorted edge ids.
inline std::vector<int> greedy_forest(const OrientedGraph& graph, const std::vector<int>& order)
{
    UnionFind sets(graph.node_count());
    std::vector<int> forest;
    for (int e : order)
        if (sets.unite(graph.edge(e).source, graph.edge(e).target))
            forest.push_back(e);
    std::sort(forest.begin(), forest.end());
    return forest;
}

/// Maximum-weight spanning forest (Kruskal, descending weight, ties by lower id).
inline std::vector<int> max_spanning_tree(const OrientedGraph& graph, const Eigen::VectorXd& weights)
{
    if (weights.size() != graph.edge_count())
        throw Error(ErrorCode::InvalidArgument, "one weight per edge required");
    if (!weights.allFinite() || (weights.array() < 0).any())
        throw Error(ErrorCode::InvalidArgument, "edge weights must be finite and nonnegative");
    std::vector<int> order(static_cast<std::size_t>(graph.edge_count()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return weights(a) > weights(b); });
    return greedy_forest(graph, order);
}

/// Spanning forest from a uniformly shuffled edge order.
inline std::vector<int> random_spanning_tree(const OrientedGraph& graph, Rng& rng)
{
    std::vector<int> order(static_cast<std::size_t>(graph.edge_count()));
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    return greedy_forest(graph, order);
}

/// Edges not in `forest` (sorted ids), ascending.
inline std::vector<int> complement_edges(const OrientedGraph& graph, const std::vector<int>& forest)
{
    std::vector<char> in_forest(static_cast<std::size_t>(graph.edge_count()), 0);
    for (int e : forest)
        in_forest[e] = 1;
    std::vector<int> rest;
    for (int e = 0; e < graph.edge_count(); ++e)
        if (!in_forest[e])
            rest.push_back(e);
    return rest;
}

/// Fundamental cycle of a uniformly chosen non-tree edge of a random spanning tree.
inline CellBoundary random_tree_cell(const OrientedGraph& graph, Rng& rng)
{
    const std::vector<int> tree = random_spanning_tree(graph, rng);
    const std::vector<int> rest = complement_edges(graph, tree);
    if (rest.empty())
        throw Error(ErrorCode::GraphIsForest, "graph has no cycle");
    const int closing = rest[uniform_index(rng, rest.size())];
    const std::vector<int> cycle = tree_cycle(graph, tree, closing);
    return boundary_from_edge_set(graph, cycle);
}

}  // namespace cellinf
