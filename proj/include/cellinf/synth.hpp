#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cellinf/complex.hpp"
#include "cellinf/error.hpp"
#include "cellinf/hodge.hpp"
#include "cellinf/random.hpp"
#include "cellinf/spanning_tree.hpp"
#include "cellinf/union_find.hpp"

namespace cellinf {

struct SynthConfig {
    int nodes = 40;
    double edge_probability = 0.9;
    int cells = 50;
    int flows = 64;
    double sigma_cell = 1.0;
    double sigma_noise = 0.0;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (nodes < 3)
            throw Error(ErrorCode::ConfigError, "synth.n must be at least 3");
        if (!(edge_probability > 0.0 && edge_probability <= 1.0))
            throw Error(ErrorCode::ConfigError, "synth.p must lie in (0, 1]");
        if (cells < 1)
            throw Error(ErrorCode::ConfigError, "synth.cells must be at least 1");
        if (flows < 1)
            throw Error(ErrorCode::ConfigError, "synth.flows must be at least 1");
        if (!(sigma_cell >= 0.0) || !(sigma_noise >= 0.0))
            throw Error(ErrorCode::ConfigError, "synth standard deviations must be nonnegative");
    }
};

inline constexpr int kGenerationRetries = 1000;

/// G(n, p) restricted to its largest connected component (ties: the one with
/// the lowest node id), nodes relabeled contiguously in original order. Edges
/// are (i, j) with i < j in lexicographic order.
inline OrientedGraph erdos_renyi_component(int nodes, double p, Rng& rng)
{
    std::vector<Edge> edges;
    for (int i = 0; i < nodes; ++i)
        for (int j = i + 1; j < nodes; ++j)
            if (uniform01(rng) < p)
                edges.push_back({i, j});
    UnionFind sets(nodes);
    for (const Edge& e : edges)
        sets.unite(e.source, e.target);
    std::vector<int> size(static_cast<std::size_t>(nodes), 0);
    for (int v = 0; v < nodes; ++v)
        ++size[sets.find(v)];
    int root = sets.find(0);
    for (int v = 0; v < nodes; ++v)
        if (size[sets.find(v)] > size[root])
            root = sets.find(v);

    std::vector<int> label(static_cast<std::size_t>(nodes), -1);
    int next = 0;
    for (int v = 0; v < nodes; ++v)
        if (sets.find(v) == root)
            label[v] = next++;
    std::vector<Edge> kept;
    for (const Edge& e : edges)
        if (label[e.source] >= 0)
            kept.push_back({label[e.source], label[e.target]});
    return OrientedGraph(next, std::move(kept));
}

/// Erdős–Rényi graph with `cells` distinct planted 2-cells, each the
/// fundamental cycle of a uniformly chosen non-tree edge of a random spanning
/// tree. Graphs that cannot host the requested cells are redrawn.
inline CellComplex random_complex(const SynthConfig& cfg, Rng& rng)
{
    cfg.validate();
    for (int draw = 0; draw < kGenerationRetries; ++draw) {
        OrientedGraph graph = erdos_renyi_component(cfg.nodes, cfg.edge_probability, rng);
        if (graph.cyclomatic_number() == 0)
            continue;
        CellComplex complex(graph);
        std::vector<CellBoundary> cells;
        int failures = 0;
        while (static_cast<int>(cells.size()) < cfg.cells && failures < kGenerationRetries) {
            CellBoundary cell = random_tree_cell(graph, rng);
            const bool duplicate =
                std::any_of(cells.begin(), cells.end(), [&](const CellBoundary& c) { return c.same_cell(cell); });
            if (duplicate)
                ++failures;
            else
                cells.push_back(std::move(cell));
        }
        if (static_cast<int>(cells.size()) == cfg.cells)
            return CellComplex(std::move(graph), std::move(cells));
    }
    throw Error(ErrorCode::GenerationFailed, "could not plant " + std::to_string(cfg.cells) + " cells after "
                                                 + std::to_string(kGenerationRetries) + " graph draws");
}

/// Columns B2 c_i + noise_i with c_i ~ N(0, sigma_cell^2) per cell and
/// noise_i ~ N(0, sigma_noise^2) per edge; drawn column by column.
inline FlowMatrix sample_flows(const CellComplex& complex, int flows, double sigma_cell, double sigma_noise, Rng& rng)
{
    if (complex.cell_count() < 1)
        throw Error(ErrorCode::InvalidArgument, "sample_flows needs at least one cell");
    if (flows < 1)
        throw Error(ErrorCode::InvalidArgument, "sample_flows needs at least one flow");
    const Eigen::SparseMatrix<double> b2 = complex.boundary_matrix_real();
    const int m = complex.graph().edge_count();
    const int k = complex.cell_count();
    FlowMatrix f(m, flows);
    Eigen::VectorXd c(k);
    Eigen::VectorXd noise(m);
    for (int i = 0; i < flows; ++i) {
        for (int j = 0; j < k; ++j)
            c(j) = sigma_cell * standard_normal(rng);
        for (int e = 0; e < m; ++e)
            noise(e) = sigma_noise * standard_normal(rng);
        f.col(i) = b2 * c + noise;
    }
    return f;
}

struct SynthDataset {
    CellComplex complex;
    FlowMatrix flows;
    double ground_truth_loss = 0.0;  ///< loss of the planted cells on the gradient-free flows
    SynthConfig config;
};

inline SynthDataset generate_dataset(const SynthConfig& cfg, const SolverConfig& solver = {})
{
    Rng rng(cfg.seed);
    SynthDataset data;
    data.config = cfg;
    data.complex = random_complex(cfg, rng);
    data.flows = sample_flows(data.complex, cfg.flows, cfg.sigma_cell, cfg.sigma_noise, rng);
    data.ground_truth_loss = loss(data.complex, remove_gradient(data.complex.graph(), data.flows, solver), solver);
    return data;
}

}  // namespace cellinf
