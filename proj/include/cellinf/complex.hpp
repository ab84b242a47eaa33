#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cellinf/error.hpp"

namespace cellinf {

struct Edge {
    int source = 0;
    int target = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Simple graph with a fixed orientation per edge. Edge ids are positions in
/// the edge list and index every edge-space vector and matrix in the library.
class OrientedGraph {
public:
    struct Incident {
        int neighbor;
        int edge;
    };

    OrientedGraph() = default;

    OrientedGraph(int node_count, std::vector<Edge> edges) : node_count_(node_count), edges_(std::move(edges))
    {
        if (node_count_ < 1)
            throw Error(ErrorCode::InvalidGraph, "graph needs at least one node");
        adjacency_.resize(static_cast<std::size_t>(node_count_));
        for (int e = 0; e < edge_count(); ++e) {
            const Edge& edge = edges_[e];
            if (edge.source < 0 || edge.source >= node_count_ || edge.target < 0 || edge.target >= node_count_)
                throw Error(ErrorCode::InvalidGraph, "edge " + std::to_string(e) + " has a node id outside [0, "
                                                         + std::to_string(node_count_) + ")");
            if (edge.source == edge.target)
                throw Error(ErrorCode::InvalidGraph, "edge " + std::to_string(e) + " is a self-loop");
            if (!lookup_.emplace(key(edge.source, edge.target), e).second)
                throw Error(ErrorCode::InvalidGraph, "edge " + std::to_string(e) + " duplicates an earlier edge");
            adjacency_[edge.source].push_back({edge.target, e});
            adjacency_[edge.target].push_back({edge.source, e});
        }
    }

    int node_count() const noexcept { return node_count_; }
    int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }
    const std::vector<Incident>& incident(int node) const { return adjacency_.at(static_cast<std::size_t>(node)); }

    /// Edge joining u and v in either direction.
    std::optional<int> edge_between(int u, int v) const
    {
        auto it = lookup_.find(key(u, v));
        if (it == lookup_.end())
            return std::nullopt;
        return it->second;
    }

    /// m - n + (number of components); zero iff the graph is a forest.
    int cyclomatic_number() const
    {
        std::vector<int> parent(static_cast<std::size_t>(node_count_));
        for (int i = 0; i < node_count_; ++i)
            parent[i] = i;
        auto find = [&](int x) {
            while (parent[x] != x)
                x = parent[x] = parent[parent[x]];
            return x;
        };
        int components = node_count_;
        for (const Edge& e : edges_) {
            int a = find(e.source), b = find(e.target);
            if (a != b) {
                parent[a] = b;
                --components;
            }
        }
        return edge_count() - node_count_ + components;
    }

    friend bool operator==(const OrientedGraph& a, const OrientedGraph& b)
    {
        return a.node_count_ == b.node_count_ && a.edges_ == b.edges_;
    }

private:
    static std::uint64_t key(int u, int v)
    {
        if (u > v)
            std::swap(u, v);
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) | static_cast<std::uint32_t>(v);
    }

    int node_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<Incident>> adjacency_;
    std::unordered_map<std::uint64_t, int> lookup_;
};

using SignedIncidence = Eigen::SparseMatrix<int>;

/// n x m incidence: +1 at the source row and -1 at the target row of each edge column.
inline SignedIncidence build_incidence(const OrientedGraph& graph)
{
    std::vector<Eigen::Triplet<int>> triplets;
    triplets.reserve(2 * graph.edges().size());
    for (int e = 0; e < graph.edge_count(); ++e) {
        triplets.emplace_back(graph.edge(e).source, e, 1);
        triplets.emplace_back(graph.edge(e).target, e, -1);
    }
    SignedIncidence incidence(graph.node_count(), graph.edge_count());
    incidence.setFromTriplets(triplets.begin(), triplets.end());
    return incidence;
}

struct SignedEdge {
    int edge;
    int sign;

    friend bool operator==(const SignedEdge&, const SignedEdge&) = default;
};

/// Signed edge vector of one 2-cell, stored sparsely and sorted by edge id.
/// The constructor only checks the encoding; use check_cell to verify that the
/// support is a simple cycle with zero net flow at every node.
class CellBoundary {
public:
    CellBoundary() = default;

    CellBoundary(int edge_count, std::vector<SignedEdge> entries) : edge_count_(edge_count), entries_(std::move(entries))
    {
        std::sort(entries_.begin(), entries_.end(), [](const SignedEdge& a, const SignedEdge& b) { return a.edge < b.edge; });
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const SignedEdge& entry = entries_[i];
            if (entry.edge < 0 || entry.edge >= edge_count_)
                throw Error(ErrorCode::InvalidCell, "edge id " + std::to_string(entry.edge) + " outside [0, "
                                                        + std::to_string(edge_count_) + ")");
            if (entry.sign != 1 && entry.sign != -1)
                throw Error(ErrorCode::InvalidCell, "sign must be +1 or -1");
            if (i > 0 && entries_[i - 1].edge == entry.edge)
                throw Error(ErrorCode::InvalidCell, "edge id " + std::to_string(entry.edge) + " repeated");
        }
    }

    int edge_count() const noexcept { return edge_count_; }
    const std::vector<SignedEdge>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    std::vector<int> support() const
    {
        std::vector<int> ids;
        ids.reserve(entries_.size());
        for (const SignedEdge& entry : entries_)
            ids.push_back(entry.edge);
        return ids;
    }

    /// Sign on edge e, 0 when e is not in the support.
    int sign_at(int e) const
    {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), e,
                                   [](const SignedEdge& entry, int id) { return entry.edge < id; });
        return (it != entries_.end() && it->edge == e) ? it->sign : 0;
    }

    Eigen::VectorXd dense() const
    {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(edge_count_);
        for (const SignedEdge& entry : entries_)
            v(entry.edge) = entry.sign;
        return v;
    }

    Eigen::VectorXi dense_int() const
    {
        Eigen::VectorXi v = Eigen::VectorXi::Zero(edge_count_);
        for (const SignedEdge& entry : entries_)
            v(entry.edge) = entry.sign;
        return v;
    }

    CellBoundary negated() const
    {
        CellBoundary out = *this;
        for (SignedEdge& entry : out.entries_)
            entry.sign = -entry.sign;
        return out;
    }

    /// Orientation-free identity: the signed support with the first entry made positive.
    std::vector<int> canonical_key() const
    {
        std::vector<int> k;
        k.reserve(entries_.size());
        const int flip = entries_.empty() ? 1 : entries_.front().sign;
        for (const SignedEdge& entry : entries_)
            k.push_back((entry.edge + 1) * entry.sign * flip);
        return k;
    }

    bool same_cell(const CellBoundary& other) const { return canonical_key() == other.canonical_key(); }

    friend bool operator==(const CellBoundary&, const CellBoundary&) = default;

private:
    int edge_count_ = 0;
    std::vector<SignedEdge> entries_;
};

namespace detail {

inline void check_edge_id(const OrientedGraph& graph, int e)
{
    if (e < 0 || e >= graph.edge_count())
        throw Error(ErrorCode::InvalidArgument, "edge id " + std::to_string(e) + " outside [0, "
                                                    + std::to_string(graph.edge_count()) + ")");
}

/// +1 if walking u -> v follows the orientation of edge e, -1 otherwise.
inline int traversal_sign(const OrientedGraph& graph, int e, int u)
{
    return graph.edge(e).source == u ? 1 : -1;
}

}  // namespace detail

/// Boundary of the closed walk `walk` (first node repeated at the end).
inline CellBoundary validate_cycle(const OrientedGraph& graph, std::span<const int> walk)
{
    if (walk.size() < 4)
        throw Error(ErrorCode::TooShort, "a cycle needs at least 3 edges");
    if (walk.front() != walk.back())
        throw Error(ErrorCode::NotClosed, "walk must end at its start node");
    std::vector<char> seen(static_cast<std::size_t>(graph.node_count()), 0);
    std::vector<SignedEdge> entries;
    entries.reserve(walk.size() - 1);
    for (std::size_t i = 0; i + 1 < walk.size(); ++i) {
        const int u = walk[i];
        const int v = walk[i + 1];
        if (u < 0 || u >= graph.node_count() || v < 0 || v >= graph.node_count())
            throw Error(ErrorCode::InvalidArgument, "node id outside the graph");
        if (seen[u])
            throw Error(ErrorCode::RepeatedNode, "node " + std::to_string(u) + " visited twice");
        seen[u] = 1;
        auto e = graph.edge_between(u, v);
        if (!e)
            throw Error(ErrorCode::MissingEdge, "no edge between " + std::to_string(u) + " and " + std::to_string(v));
        entries.push_back({*e, detail::traversal_sign(graph, *e, u)});
    }
    return CellBoundary(graph.edge_count(), std::move(entries));
}

/// Orients an unordered simple cycle: start at its lowest node id and move
/// first toward the lower of that node's two cycle neighbors.
inline CellBoundary boundary_from_edge_set(const OrientedGraph& graph, std::span<const int> edge_ids)
{
    if (edge_ids.empty())
        throw Error(ErrorCode::NotACycle, "empty edge set");
    std::vector<int> ids(edge_ids.begin(), edge_ids.end());
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw Error(ErrorCode::NotACycle, "edge set lists an edge twice");
    for (int e : ids)
        detail::check_edge_id(graph, e);
    if (ids.size() < 3)
        throw Error(ErrorCode::NotACycle, "fewer than 3 edges");

    // node -> up to two incident cycle edges
    std::unordered_map<int, std::vector<int>> incident;
    for (int e : ids) {
        incident[graph.edge(e).source].push_back(e);
        incident[graph.edge(e).target].push_back(e);
    }
    int start = graph.node_count();
    for (const auto& [node, edges] : incident) {
        if (edges.size() != 2)
            throw Error(ErrorCode::NotACycle, "node " + std::to_string(node) + " has cycle degree "
                                                  + std::to_string(edges.size()));
        start = std::min(start, node);
    }
    auto other = [&](int e, int node) { return graph.edge(e).source == node ? graph.edge(e).target : graph.edge(e).source; };

    const auto& first = incident[start];
    int next_edge = other(first[0], start) < other(first[1], start) ? first[0] : first[1];
    std::vector<SignedEdge> entries;
    entries.reserve(ids.size());
    int node = start;
    do {
        entries.push_back({next_edge, detail::traversal_sign(graph, next_edge, node)});
        node = other(next_edge, node);
        const auto& pair = incident[node];
        next_edge = pair[0] == next_edge ? pair[1] : pair[0];
    } while (node != start);
    if (entries.size() != ids.size())
        throw Error(ErrorCode::NotACycle, "edge set is not connected");
    return CellBoundary(graph.edge_count(), std::move(entries));
}

/// Throws InvalidCell unless `cell` is a simple cycle of `graph` with B1 * cell = 0.
inline void check_cell(const OrientedGraph& graph, const CellBoundary& cell)
{
    if (cell.edge_count() != graph.edge_count())
        throw Error(ErrorCode::InvalidCell, "boundary length does not match the edge count");
    if (cell.size() < 3)
        throw Error(ErrorCode::InvalidCell, "support has fewer than 3 edges");
    std::unordered_map<int, int> net;
    for (const SignedEdge& entry : cell.entries()) {
        net[graph.edge(entry.edge).source] += entry.sign;
        net[graph.edge(entry.edge).target] -= entry.sign;
    }
    for (const auto& [node, flow] : net)
        if (flow != 0)
            throw Error(ErrorCode::InvalidCell, "nonzero net flow at node " + std::to_string(node));
    try {
        const std::vector<int> support = cell.support();
        (void)boundary_from_edge_set(graph, support);
    } catch (const Error& err) {
        throw Error(ErrorCode::InvalidCell, std::string("support is not a simple cycle (") + err.what() + ")");
    }
}

/// The unique cycle made of `closing_edge` and the forest path between its
/// endpoints, as sorted edge ids.
inline std::vector<int> tree_cycle(const OrientedGraph& graph, std::span<const int> forest_edges, int closing_edge)
{
    detail::check_edge_id(graph, closing_edge);
    std::vector<std::vector<OrientedGraph::Incident>> forest(static_cast<std::size_t>(graph.node_count()));
    for (int e : forest_edges) {
        detail::check_edge_id(graph, e);
        if (e == closing_edge)
            throw Error(ErrorCode::InvalidArgument, "closing edge is part of the forest");
        forest[graph.edge(e).source].push_back({graph.edge(e).target, e});
        forest[graph.edge(e).target].push_back({graph.edge(e).source, e});
    }
    const int from = graph.edge(closing_edge).source;
    const int to = graph.edge(closing_edge).target;
    std::vector<int> via(static_cast<std::size_t>(graph.node_count()), -1);
    std::vector<char> seen(static_cast<std::size_t>(graph.node_count()), 0);
    std::deque<int> queue{from};
    seen[from] = 1;
    while (!queue.empty() && !seen[to]) {
        int u = queue.front();
        queue.pop_front();
        for (const auto& [v, e] : forest[u]) {
            if (seen[v])
                continue;
            seen[v] = 1;
            via[v] = e;
            queue.push_back(v);
        }
    }
    if (!seen[to])
        throw Error(ErrorCode::NoPath, "endpoints of edge " + std::to_string(closing_edge) + " are in different forest components");
    std::vector<int> cycle{closing_edge};
    for (int node = to; node != from;) {
        const int e = via[node];
        cycle.push_back(e);
        node = graph.edge(e).source == node ? graph.edge(e).target : graph.edge(e).source;
    }
    std::sort(cycle.begin(), cycle.end());
    return cycle;
}

/// Graph plus an ordered list of 2-cells.
class CellComplex {
public:
    CellComplex() = default;

    explicit CellComplex(OrientedGraph graph) : graph_(std::move(graph)) {}

    CellComplex(OrientedGraph graph, std::vector<CellBoundary> cells) : graph_(std::move(graph)), cells_(std::move(cells))
    {
        std::set<std::vector<int>> keys;
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            check_cell(graph_, cells_[i]);
            if (!keys.insert(cells_[i].canonical_key()).second)
                throw Error(ErrorCode::InvalidCell, "cell " + std::to_string(i) + " duplicates an earlier cell");
        }
    }

    const OrientedGraph& graph() const noexcept { return graph_; }
    const std::vector<CellBoundary>& cells() const noexcept { return cells_; }
    int cell_count() const noexcept { return static_cast<int>(cells_.size()); }

    bool contains(const CellBoundary& cell) const
    {
        return std::any_of(cells_.begin(), cells_.end(), [&](const CellBoundary& c) { return c.same_cell(cell); });
    }

    /// m x k boundary matrix B2 with one column per cell.
    Eigen::SparseMatrix<int> boundary_matrix() const
    {
        std::vector<Eigen::Triplet<int>> triplets;
        for (int c = 0; c < cell_count(); ++c)
            for (const SignedEdge& entry : cells_[c].entries())
                triplets.emplace_back(entry.edge, c, entry.sign);
        Eigen::SparseMatrix<int> b2(graph_.edge_count(), cell_count());
        b2.setFromTriplets(triplets.begin(), triplets.end());
        return b2;
    }

    Eigen::SparseMatrix<double> boundary_matrix_real() const { return boundary_matrix().cast<double>(); }

private:
    friend struct AddCellsAccess;
    OrientedGraph graph_;
    std::vector<CellBoundary> cells_;
};

struct AddCellsResult {
    CellComplex complex;
    std::vector<std::size_t> added;    ///< batch indices that were appended
    std::vector<std::size_t> dropped;  ///< batch indices skipped as duplicates (up to sign)
};

struct AddCellsAccess {
    static std::vector<CellBoundary>& cells(CellComplex& c) { return c.cells_; }
};

inline AddCellsResult add_cells(const CellComplex& complex, std::span<const CellBoundary> new_cells)
{
    AddCellsResult result{complex, {}, {}};
    std::set<std::vector<int>> keys;
    for (const CellBoundary& cell : complex.cells())
        keys.insert(cell.canonical_key());
    auto& cells = AddCellsAccess::cells(result.complex);
    for (std::size_t i = 0; i < new_cells.size(); ++i) {
        check_cell(complex.graph(), new_cells[i]);
        if (keys.insert(new_cells[i].canonical_key()).second) {
            cells.push_back(new_cells[i]);
            result.added.push_back(i);
        } else {
            result.dropped.push_back(i);
        }
    }
    return result;
}

}  // namespace cellinf
