#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cellinf/complex.hpp"
#include "cellinf/error.hpp"
#include "cellinf/factorize.hpp"

namespace cellinf {

struct SolverConfig {
    double residual_tolerance = 1e-8;
    /// Unset means 10 * (m + max(n, k)) for the problem at hand.
    std::optional<long> max_iterations;

    void validate() const
    {
        if (!(residual_tolerance > 0))
            throw Error(ErrorCode::ConfigError, "solver.tolerance must be positive");
        if (max_iterations && *max_iterations < 1)
            throw Error(ErrorCode::ConfigError, "solver.max_iterations must be at least 1");
    }
};

/// Accumulated cost of iterative solves. One call is one least_squares
/// invocation regardless of the number of right-hand sides.
struct SolveStats {
    long calls = 0;
    long iterations = 0;
    long unconverged_columns = 0;

    SolveStats& operator+=(const SolveStats& other)
    {
        calls += other.calls;
        iterations += other.iterations;
        unconverged_columns += other.unconverged_columns;
        return *this;
    }
};

struct LeastSquaresResult {
    Eigen::MatrixXd solution;
    long iterations = 0;
    bool converged = true;
};

namespace detail {

struct ColumnSolve {
    long iterations = 0;
    bool converged = true;
};

/// LSMR (Fong & Saunders) without damping, started from x = 0 so the limit is
/// the minimum-norm least-squares solution. Stops once ||A^T r|| <= tol * ||A^T y||,
/// confirming the recurrence estimate against the true residual.
inline ColumnSolve lsmr(const Eigen::SparseMatrix<double>& a, const Eigen::SparseMatrix<double>& at,
                        const Eigen::VectorXd& y, double tol, long max_iterations, Eigen::Ref<Eigen::VectorXd> x)
{
    x.setZero();
    Eigen::VectorXd u = y;
    double beta = u.norm();
    if (beta > 0)
        u /= beta;
    Eigen::VectorXd v = at * u;
    double alpha = v.norm();
    if (alpha > 0)
        v /= alpha;
    const double target = tol * alpha * beta;
    if (alpha * beta == 0.0)
        return {0, true};

    double zetabar = alpha * beta;
    double alphabar = alpha;
    double rho = 1.0, rhobar = 1.0, cbar = 1.0, sbar = 0.0;
    Eigen::VectorXd h = v;
    Eigen::VectorXd hbar = Eigen::VectorXd::Zero(v.size());

    for (long it = 1; it <= max_iterations; ++it) {
        u = a * v - alpha * u;
        beta = u.norm();
        if (beta > 0)
            u /= beta;
        v = at * u - beta * v;
        alpha = v.norm();
        if (alpha > 0)
            v /= alpha;

        const double rhoold = rho;
        rho = std::hypot(alphabar, beta);
        const double c = alphabar / rho;
        const double s = beta / rho;
        const double thetanew = s * alpha;
        alphabar = c * alpha;

        const double rhobarold = rhobar;
        const double thetabar = sbar * rho;
        const double rhotemp = cbar * rho;
        rhobar = std::hypot(rhotemp, thetanew);
        cbar = rhotemp / rhobar;
        sbar = thetanew / rhobar;
        const double zeta = cbar * zetabar;
        zetabar = -sbar * zetabar;

        hbar = h - (thetabar * rho / (rhoold * rhobarold)) * hbar;
        x += (zeta / (rho * rhobar)) * hbar;
        h = v - (thetanew / rho) * h;

        if (std::abs(zetabar) <= target || alpha == 0.0) {
            const double normar = (at * (y - a * x)).norm();
            if (normar <= target)
                return {it, true};
            if (alpha == 0.0)
                return {it, false};
        }
    }
    return {max_iterations, false};
}

inline long default_max_iterations(const SolverConfig& cfg, long rows, long cols)
{
    return cfg.max_iterations.value_or(10 * (rows + cols));
}

}  // namespace detail

/// Column-wise minimum-norm least squares min ||A x - y|| with LSMR.
/// Non-convergence is reported through the result, never thrown.
inline LeastSquaresResult least_squares(const Eigen::SparseMatrix<double>& a, const Eigen::MatrixXd& y,
                                        const SolverConfig& cfg, SolveStats* stats = nullptr)
{
    cfg.validate();
    if (a.rows() != y.rows())
        throw Error(ErrorCode::InvalidArgument, "least_squares: A has " + std::to_string(a.rows())
                                                    + " rows but Y has " + std::to_string(y.rows()));
    LeastSquaresResult result;
    result.solution = Eigen::MatrixXd::Zero(a.cols(), y.cols());
    if (a.cols() > 0) {
        const Eigen::SparseMatrix<double> at = a.transpose();
        const long budget = detail::default_max_iterations(cfg, a.rows(), a.cols());
        long unconverged = 0;
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            const detail::ColumnSolve col =
                detail::lsmr(a, at, y.col(j), cfg.residual_tolerance, budget, result.solution.col(j));
            result.iterations += col.iterations;
            if (!col.converged)
                ++unconverged;
        }
        result.converged = unconverged == 0;
        if (stats)
            stats->unconverged_columns += unconverged;
    }
    if (stats) {
        stats->calls += 1;
        stats->iterations += result.iterations;
    }
    return result;
}

namespace detail {

inline void check_flows(const OrientedGraph& graph, const FlowMatrix& f)
{
    if (f.rows() != graph.edge_count())
        throw Error(ErrorCode::InvalidArgument, "flow matrix has " + std::to_string(f.rows()) + " rows for "
                                                    + std::to_string(graph.edge_count()) + " edges");
    if (!f.allFinite())
        throw Error(ErrorCode::InvalidArgument, "flow matrix has non-finite entries");
}

inline SolverConfig with_budget(SolverConfig cfg, long m, long n, long k)
{
    if (!cfg.max_iterations)
        cfg.max_iterations = 10 * (m + std::max(n, k));
    return cfg;
}

}  // namespace detail

/// Projection of F onto the gradient space Im B1^T.
inline FlowMatrix gradient_component(const OrientedGraph& graph, const FlowMatrix& f, const SolverConfig& cfg,
                                     SolveStats* stats = nullptr)
{
    detail::check_flows(graph, f);
    const Eigen::SparseMatrix<double> b1t = build_incidence(graph).cast<double>().transpose();
    const SolverConfig budgeted = detail::with_budget(cfg, graph.edge_count(), graph.node_count(), 0);
    return b1t * least_squares(b1t, f, budgeted, stats).solution;
}

inline FlowMatrix remove_gradient(const OrientedGraph& graph, const FlowMatrix& f, const SolverConfig& cfg,
                                  SolveStats* stats = nullptr)
{
    return f - gradient_component(graph, f, cfg, stats);
}

/// Projection of F onto the curl space Im B2; zero for a complex without cells.
inline FlowMatrix curl_component(const CellComplex& complex, const FlowMatrix& f, const SolverConfig& cfg,
                                 SolveStats* stats = nullptr)
{
    detail::check_flows(complex.graph(), f);
    if (complex.cell_count() == 0)
        return FlowMatrix::Zero(f.rows(), f.cols());
    const Eigen::SparseMatrix<double> b2 = complex.boundary_matrix_real();
    const SolverConfig budgeted = detail::with_budget(cfg, complex.graph().edge_count(), complex.graph().node_count(),
                                                      complex.cell_count());
    return b2 * least_squares(b2, f, budgeted, stats).solution;
}

/// Harmonic part of gradient-free flows: F minus its curl component.
inline FlowMatrix harmonic_projection(const CellComplex& complex, const FlowMatrix& f, const SolverConfig& cfg,
                                      SolveStats* stats = nullptr)
{
    detail::check_flows(complex.graph(), f);
    if (complex.cell_count() == 0)
        return f;
    return f - curl_component(complex, f, cfg, stats);
}

inline double loss(const CellComplex& complex, const FlowMatrix& f, const SolverConfig& cfg, SolveStats* stats = nullptr)
{
    return harmonic_projection(complex, f, cfg, stats).norm();
}

struct ApproxUpdateResult {
    FlowMatrix flows;
    int span_rank = 0;
    bool degenerate_span = false;
};

/// H_prev - P * (basis * coefficients), where P projects onto the span of the
/// chosen boundaries. Uses a dense orthogonal decomposition, no iterative solve.
inline ApproxUpdateResult approx_harmonic_update(const FlowMatrix& h_prev, std::span<const CellBoundary> chosen,
                                                 const Factorization& fact)
{
    if (chosen.empty())
        throw Error(ErrorCode::InvalidArgument, "approx_harmonic_update needs at least one chosen cell");
    if (fact.basis.rows() != h_prev.rows() || fact.coefficients.cols() != h_prev.cols())
        throw Error(ErrorCode::InvalidArgument, "factorization shape does not match the harmonic flows");
    Eigen::MatrixXd boundaries(h_prev.rows(), static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t j = 0; j < chosen.size(); ++j) {
        if (chosen[j].edge_count() != h_prev.rows())
            throw Error(ErrorCode::InvalidArgument, "boundary length does not match the flow matrix");
        boundaries.col(static_cast<Eigen::Index>(j)) = chosen[j].dense();
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(boundaries);
    ApproxUpdateResult out;
    out.span_rank = static_cast<int>(cod.rank());
    out.degenerate_span = out.span_rank < static_cast<int>(chosen.size());
    out.flows = h_prev - boundaries * cod.solve(fact.product());
    return out;
}

}  // namespace cellinf
