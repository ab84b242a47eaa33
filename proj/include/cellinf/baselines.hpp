#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cellinf/complex.hpp"
#include "cellinf/hodge.hpp"
#include "cellinf/mfci.hpp"
#include "cellinf/random.hpp"
#include "cellinf/spanning_tree.hpp"
#include "cellinf/trace.hpp"

namespace cellinf {

/// Spanning-tree candidates: weights are the aggregate absolute flow per edge,
/// the tree is a maximum spanning tree, and the heaviest non-tree edges close
/// one fundamental cycle each. Cells already in the complex are skipped.
inline std::vector<CellBoundary> sph_candidates(const CellComplex& complex, const FlowMatrix& h, int count)
{
    const OrientedGraph& graph = complex.graph();
    detail::check_flows(graph, h);
    const Eigen::VectorXd weights = h.cwiseAbs().rowwise().sum();
    const Eigen::VectorXd net = h.rowwise().sum();
    const std::vector<int> tree = max_spanning_tree(graph, weights);
    std::vector<int> rest = complement_edges(graph, tree);
    std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) { return weights(a) > weights(b); });

    std::vector<CellBoundary> out;
    for (int closing : rest) {
        if (static_cast<int>(out.size()) >= count)
            break;
        CellBoundary cell = boundary_from_edge_set(graph, tree_cycle(graph, tree, closing));
        if (net(closing) != 0.0 && (net(closing) > 0) != (cell.sign_at(closing) > 0))
            cell = cell.negated();
        if (!complex.contains(cell))
            out.push_back(std::move(cell));
    }
    return out;
}

struct SphConfig {
    int total_cells = 1;
    int candidates = 11;
    SolverConfig solver;

    void validate() const
    {
        solver.validate();
        if (total_cells < 1)
            throw Error(ErrorCode::ConfigError, "total_cells must be at least 1");
        if (candidates < 1)
            throw Error(ErrorCode::ConfigError, "sph candidates must be at least 1");
    }
};

/// Greedy spanning-tree baseline: per iteration one exact projection, one
/// exact evaluation per candidate, and the single best candidate is added.
inline InferenceResult infer_sph(const OrientedGraph& graph, const FlowMatrix& f, const SphConfig& cfg)
{
    detail::check_flows(graph, f);
    cfg.validate();
    Stopwatch clock;
    clock.start();
    SolveStats stats;
    const FlowMatrix f_free = remove_gradient(graph, f, cfg.solver, &stats);
    InferenceResult result{CellComplex(graph), {}};
    result.trace.records.push_back(detail::make_record(0, result.complex, {}, f_free.norm(), clock, stats));

    int iteration = 0;
    while (result.complex.cell_count() < cfg.total_cells) {
        ++iteration;
        const FlowMatrix h = harmonic_projection(result.complex, f_free, cfg.solver, &stats);
        const std::vector<CellBoundary> candidates = sph_candidates(result.complex, h, cfg.candidates);
        if (candidates.empty()) {
            result.trace.stop_reason = "no candidates";
            break;
        }
        const std::vector<double> losses = candidate_losses(result.complex, f_free, candidates, cfg.solver, &stats);
        const auto best = static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin());
        result.complex = add_cells(result.complex, std::span<const CellBoundary>(&candidates[best], 1)).complex;
        IterationRecord record =
            detail::make_record(iteration, result.complex, {candidates[best]}, losses[best], clock, stats);
        record.candidates_found = static_cast<int>(candidates.size());
        result.trace.records.push_back(std::move(record));
    }
    if (result.trace.stop_reason.empty())
        result.trace.stop_reason = "cell budget reached";
    return result;
}

inline constexpr int kRandomResamples = 100;

/// Random fundamental cycles of random spanning trees. Losses are computed for
/// reporting only and are neither timed nor counted as solver calls.
inline InferenceResult infer_random(const OrientedGraph& graph, const FlowMatrix& f, int total_cells, Rng& rng,
                                    const SolverConfig& solver = {})
{
    detail::check_flows(graph, f);
    solver.validate();
    if (graph.cyclomatic_number() == 0)
        throw Error(ErrorCode::GraphIsForest, "random baseline needs a graph with a cycle");
    Stopwatch clock;
    clock.start();
    SolveStats stats;
    const FlowMatrix f_free = remove_gradient(graph, f, solver, &stats);
    InferenceResult result{CellComplex(graph), {}};
    result.trace.records.push_back(detail::make_record(0, result.complex, {}, f_free.norm(), clock, stats));

    for (int iteration = 1; result.complex.cell_count() < total_cells; ++iteration) {
        bool placed = false;
        for (int attempt = 0; attempt <= kRandomResamples && !placed; ++attempt) {
            CellBoundary cell = random_tree_cell(graph, rng);
            if (result.complex.contains(cell))
                continue;
            result.complex = add_cells(result.complex, std::span<const CellBoundary>(&cell, 1)).complex;
            clock.pause();
            const double reported = loss(result.complex, f_free, solver);
            clock.start();
            result.trace.records.push_back(detail::make_record(iteration, result.complex, {cell}, reported, clock, stats));
            placed = true;
        }
        if (!placed) {
            result.trace.stop_reason = "resampling budget exhausted";
            break;
        }
    }
    if (result.trace.stop_reason.empty())
        result.trace.stop_reason = "cell budget reached";
    return result;
}

}  // namespace cellinf
