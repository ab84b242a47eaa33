#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "cellinf/complex.hpp"
#include "cellinf/error.hpp"
#include "cellinf/factorize.hpp"
#include "cellinf/hodge.hpp"
#include "cellinf/random.hpp"
#include "cellinf/trace.hpp"
#include "cellinf/union_find.hpp"

namespace cellinf {

enum class Discretization { Deterministic, RandomWalk };
enum class Projection { Exact, Approximate };

/// Parameters of the factorization-based inference loop. "1oo8" is
/// candidates = 8, added_per_iteration = 1 with evaluation; "8oo-1" is
/// candidates = added_per_iteration = 8 without evaluation.
struct InferenceConfig {
    int total_cells = 1;          // k
    int candidates = 1;           // l
    int added_per_iteration = 1;  // l'
    std::optional<int> rank;      // r, defaults to l
    FactorMethod method = FactorMethod::Svd;
    IcaConfig ica;
    Discretization discretization = Discretization::Deterministic;
    bool evaluate_candidates = true;
    Projection projection = Projection::Exact;
    SolverConfig solver;

    int effective_rank() const { return rank.value_or(candidates); }

    /// Evaluation can only be skipped when every candidate is added.
    bool evaluates() const { return evaluate_candidates || added_per_iteration < candidates; }

    void validate(long edges, long flows) const
    {
        solver.validate();
        const int r = effective_rank();
        if (added_per_iteration < 1)
            throw Error(ErrorCode::ConfigError, "added_per_iteration must be at least 1");
        if (candidates < added_per_iteration)
            throw Error(ErrorCode::ConfigError, "candidates must be >= added_per_iteration");
        if (r < candidates)
            throw Error(ErrorCode::ConfigError, "rank must be >= candidates");
        if (r > std::min(edges, flows))
            throw Error(ErrorCode::ConfigError, "rank " + std::to_string(r) + " exceeds min(m, s) = "
                                                    + std::to_string(std::min(edges, flows)));
        if (total_cells < added_per_iteration)
            throw Error(ErrorCode::ConfigError, "total_cells must be >= added_per_iteration");
        if (method == FactorMethod::Ica && flows < 2)
            throw Error(ErrorCode::ConfigError, "ICA needs at least two flows");
    }
};

/// Flip `cell` so that, on the support edge where |weights| is largest (ties
/// by lower id), its sign agrees with the sign of the weight there.
inline CellBoundary align_sign(const CellBoundary& cell, const Eigen::VectorXd& weights)
{
    int best = -1;
    double best_abs = -1.0;
    for (const SignedEdge& entry : cell.entries()) {
        const double a = std::abs(weights(entry.edge));
        if (a > best_abs) {
            best_abs = a;
            best = entry.edge;
        }
    }
    if (best < 0 || weights(best) == 0.0)
        return cell;
    return (weights(best) > 0) == (cell.sign_at(best) > 0) ? cell : cell.negated();
}

namespace detail {

inline void check_edge_vector(const OrientedGraph& graph, const Eigen::VectorXd& b)
{
    if (b.size() != graph.edge_count())
        throw Error(ErrorCode::InvalidArgument, "edge vector length " + std::to_string(b.size()) + " does not match "
                                                    + std::to_string(graph.edge_count()) + " edges");
}

}  // namespace detail

/// Adds edges by decreasing |b| (ties by lower id) to an empty forest; the
/// first edge closing a cycle yields the cell.
inline CellBoundary discretize_deterministic(const OrientedGraph& graph, const Eigen::VectorXd& b)
{
    detail::check_edge_vector(graph, b);
    std::vector<int> order(static_cast<std::size_t>(graph.edge_count()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return std::abs(b(x)) > std::abs(b(y)); });

    UnionFind sets(graph.node_count());
    std::vector<int> forest;
    for (int e : order) {
        if (sets.unite(graph.edge(e).source, graph.edge(e).target)) {
            forest.push_back(e);
            continue;
        }
        const std::vector<int> cycle = tree_cycle(graph, forest, e);
        return align_sign(boundary_from_edge_set(graph, cycle), b);
    }
    throw Error(ErrorCode::GraphIsForest, "no edge closes a cycle");
}

inline constexpr int kWalkRestarts = 20;

/// Random walk from the source of the max-|b| edge over unused edges, picking
/// edges with probability proportional to |b| (uniform if all incident unused
/// weights are zero). The first revisited node closes the returned cycle.
inline CellBoundary discretize_random_walk(const OrientedGraph& graph, const Eigen::VectorXd& b, Rng& rng)
{
    detail::check_edge_vector(graph, b);
    if (graph.edge_count() == 0)
        throw Error(ErrorCode::WalkFailed, "graph has no edges");
    Eigen::Index top = 0;
    b.cwiseAbs().maxCoeff(&top);
    const int start = graph.edge(static_cast<int>(top)).source;

    std::vector<char> used(static_cast<std::size_t>(graph.edge_count()));
    std::vector<int> position(static_cast<std::size_t>(graph.node_count()));
    std::vector<int> options;
    std::vector<double> weights;
    for (int attempt = 0; attempt <= kWalkRestarts; ++attempt) {
        std::fill(used.begin(), used.end(), 0);
        std::fill(position.begin(), position.end(), -1);
        std::vector<int> path{start};
        position[start] = 0;
        int node = start;
        while (true) {
            options.clear();
            weights.clear();
            double total = 0.0;
            for (const auto& [neighbor, e] : graph.incident(node)) {
                if (used[e])
                    continue;
                options.push_back(e);
                weights.push_back(std::abs(b(e)));
                total += weights.back();
            }
            if (options.empty())
                break;  // dead end, restart
            const std::size_t pick =
                total > 0.0 ? weighted_index(rng, weights) : static_cast<std::size_t>(uniform_index(rng, options.size()));
            const int e = options[pick];
            used[e] = 1;
            const int next = graph.edge(e).source == node ? graph.edge(e).target : graph.edge(e).source;
            if (position[next] >= 0) {
                std::vector<int> loop(path.begin() + position[next], path.end());
                loop.push_back(next);
                return align_sign(validate_cycle(graph, loop), b);
            }
            position[next] = static_cast<int>(path.size());
            path.push_back(next);
            node = next;
        }
    }
    throw Error(ErrorCode::WalkFailed, "every walk reached a dead end");
}

struct CandidateSearch {
    std::vector<CellBoundary> candidates;
    Factorization factorization;
    int dropped = 0;
};

/// One candidate-search round: factorize H, keep the best-scoring columns,
/// discretize each to a cycle. Failed and duplicate discretizations are dropped.
inline CandidateSearch candidate_search(const CellComplex& complex, const FlowMatrix& h, const InferenceConfig& cfg,
                                        Rng& rng)
{
    CandidateSearch out;
    if (cfg.method == FactorMethod::Svd) {
        out.factorization = truncated_svd(h, cfg.effective_rank());
    } else {
        IcaConfig ica = cfg.ica;
        ica.seed = rng();
        out.factorization = fast_ica(h, cfg.effective_rank(), ica);
    }
    const Eigen::VectorXd scores = column_scores(h, out.factorization);
    const std::vector<Eigen::VectorXd> columns = select_columns(out.factorization, scores, cfg.candidates);
    for (const Eigen::VectorXd& column : columns) {
        try {
            CellBoundary cell = cfg.discretization == Discretization::Deterministic
                                    ? discretize_deterministic(complex.graph(), column)
                                    : discretize_random_walk(complex.graph(), column, rng);
            const bool duplicate =
                complex.contains(cell) || std::any_of(out.candidates.begin(), out.candidates.end(),
                                                      [&](const CellBoundary& c) { return c.same_cell(cell); });
            if (duplicate)
                ++out.dropped;
            else
                out.candidates.push_back(std::move(cell));
        } catch (const Error& err) {
            if (err.code() != ErrorCode::GraphIsForest && err.code() != ErrorCode::WalkFailed)
                throw;
            ++out.dropped;
        }
    }
    return out;
}

/// Exact loss of complex + {candidate} for every candidate, one solve each.
inline std::vector<double> candidate_losses(const CellComplex& complex, const FlowMatrix& f,
                                            std::span<const CellBoundary> candidates, const SolverConfig& solver,
                                            SolveStats* stats = nullptr)
{
    std::vector<double> losses;
    losses.reserve(candidates.size());
    for (const CellBoundary& candidate : candidates) {
        const CellComplex extended = add_cells(complex, std::span<const CellBoundary>(&candidate, 1)).complex;
        losses.push_back(loss(extended, f, solver, stats));
    }
    return losses;
}

/// The `count` candidates with the lowest post-addition loss (ties by
/// candidate order). Skips evaluation entirely when it is disabled and every
/// candidate is to be added.
inline std::vector<CellBoundary> evaluate_and_select(const CellComplex& complex, const FlowMatrix& f_gradient_free,
                                                     std::span<const CellBoundary> candidates, int count,
                                                     const InferenceConfig& cfg, SolveStats* stats = nullptr)
{
    const std::size_t keep = std::min(candidates.size(), static_cast<std::size_t>(std::max(count, 0)));
    if (!cfg.evaluates() && count == cfg.candidates)
        return {candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep)};
    const std::vector<double> losses = candidate_losses(complex, f_gradient_free, candidates, cfg.solver, stats);
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
    std::vector<CellBoundary> chosen;
    chosen.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i)
        chosen.push_back(candidates[order[i]]);
    return chosen;
}

/// Factorization-based cell inference. Gradient components are removed once
/// up front; every trace record reports the exact loss, and loss
/// recomputation done only for reporting is neither timed nor counted.
inline InferenceResult infer_mfci(const OrientedGraph& graph, const FlowMatrix& f, const InferenceConfig& cfg, Rng& rng)
{
    detail::check_flows(graph, f);
    cfg.validate(graph.edge_count(), f.cols());

    Stopwatch clock;
    clock.start();
    SolveStats stats;
    const FlowMatrix f_free = remove_gradient(graph, f, cfg.solver, &stats);
    InferenceResult result{CellComplex(graph), {}};
    FlowMatrix h = f_free;
    result.trace.records.push_back(detail::make_record(0, result.complex, {}, f_free.norm(), clock, stats));

    int iteration = 0;
    while (result.complex.cell_count() < cfg.total_cells) {
        ++iteration;
        CandidateSearch search;
        try {
            search = candidate_search(result.complex, h, cfg, rng);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::DegenerateInput)
                throw;
            result.trace.stop_reason = "degenerate harmonic flow";
            break;
        }
        if (search.candidates.empty()) {
            result.trace.stop_reason = "no candidates";
            break;
        }
        std::vector<CellBoundary> chosen =
            evaluate_and_select(result.complex, f_free, search.candidates, cfg.added_per_iteration, cfg, &stats);
        const auto room = static_cast<std::size_t>(cfg.total_cells - result.complex.cell_count());
        if (chosen.size() > room)
            chosen.resize(room);
        result.complex = add_cells(result.complex, chosen).complex;

        bool degenerate_span = false;
        double reported = 0.0;
        if (cfg.projection == Projection::Exact) {
            h = harmonic_projection(result.complex, f_free, cfg.solver, &stats);
            reported = h.norm();
        } else {
            ApproxUpdateResult update = approx_harmonic_update(h, chosen, search.factorization);
            h = std::move(update.flows);
            degenerate_span = update.degenerate_span;
            clock.pause();
            reported = loss(result.complex, f_free, cfg.solver);
            clock.start();
        }
        IterationRecord record = detail::make_record(iteration, result.complex, chosen, reported, clock, stats);
        record.candidates_found = static_cast<int>(search.candidates.size());
        record.candidates_dropped = search.dropped;
        record.degenerate_span = degenerate_span;
        result.trace.records.push_back(std::move(record));
    }
    if (result.trace.stop_reason.empty())
        result.trace.stop_reason = "cell budget reached";
    return result;
}

}  // namespace cellinf
