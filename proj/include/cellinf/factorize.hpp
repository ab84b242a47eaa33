#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cellinf/error.hpp"
#include "cellinf/random.hpp"

namespace cellinf {

using FlowMatrix = Eigen::MatrixXd;

enum class FactorMethod { Svd, Ica };

/// Low-rank approximation H ~ basis * coefficients with basis m x r and
/// coefficients r x s. Basis columns are unit length and the entry of largest
/// magnitude in each column is positive.
struct Factorization {
    Eigen::MatrixXd basis;
    Eigen::MatrixXd coefficients;
    FactorMethod method = FactorMethod::Svd;
    bool converged = true;

    int rank() const { return static_cast<int>(basis.cols()); }
    Eigen::MatrixXd product() const { return basis * coefficients; }
};

/// Which axis of H holds the samples for the independence criterion. With
/// `Flows` the rows of the coefficient matrix are the independent sources
/// (one value per observed flow); with `Edges` the basis columns are.
enum class IcaAxis { Flows, Edges };

struct IcaConfig {
    int max_iterations = 200;
    double tolerance = 1e-4;
    std::uint64_t seed = 0;
    IcaAxis axis = IcaAxis::Flows;
};

namespace detail {

inline void check_rank(const FlowMatrix& h, int rank)
{
    if (h.rows() == 0 || h.cols() == 0)
        throw Error(ErrorCode::InvalidArgument, "empty flow matrix");
    const Eigen::Index limit = std::min(h.rows(), h.cols());
    if (rank < 1 || rank > limit)
        throw Error(ErrorCode::RankTooLarge, "rank " + std::to_string(rank) + " outside [1, " + std::to_string(limit) + "]");
}

inline void check_not_degenerate(const FlowMatrix& h)
{
    if (!h.allFinite())
        throw Error(ErrorCode::InvalidArgument, "flow matrix has non-finite entries");
    const double floor = 1e-12 * std::sqrt(static_cast<double>(h.rows()) * static_cast<double>(h.cols()));
    if (h.norm() < floor)
        throw Error(ErrorCode::DegenerateInput, "flow matrix is numerically zero");
}

/// Flip each (basis column, coefficient row) pair so the basis entry of
/// largest magnitude is positive; ties resolve to the lowest row.
inline void fix_signs(Factorization& fact)
{
    for (int j = 0; j < fact.rank(); ++j) {
        Eigen::Index row = 0;
        fact.basis.col(j).cwiseAbs().maxCoeff(&row);
        if (fact.basis(row, j) < 0) {
            fact.basis.col(j) *= -1.0;
            fact.coefficients.row(j) *= -1.0;
        }
    }
}

inline void normalize_basis(Factorization& fact)
{
    for (int j = 0; j < fact.rank(); ++j) {
        const double n = fact.basis.col(j).norm();
        if (n > 0) {
            fact.basis.col(j) /= n;
            fact.coefficients.row(j) *= n;
        }
    }
}

struct IcaResult {
    Eigen::MatrixXd mixing;   // d x r
    Eigen::MatrixXd sources;  // r x N
    bool converged = true;
};

/// Deflation FastICA with log-cosh contrast on X (d mixtures x N samples),
/// whitened by the SVD of the uncentered data. Directions whose singular
/// value is negligible are passed through as plain SVD components.
inline IcaResult fast_ica_core(const Eigen::MatrixXd& x, int rank, const IcaConfig& cfg)
{
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const Eigen::MatrixXd& u = svd.matrixU();
    const Eigen::MatrixXd& v = svd.matrixV();
    const double samples = static_cast<double>(x.cols());

    int effective = 0;
    while (effective < rank && sigma(effective) > 1e-10 * sigma(0))
        ++effective;

    // whitened samples, unit second moment per row
    const Eigen::MatrixXd z = std::sqrt(samples) * v.leftCols(effective).transpose();

    Rng rng(cfg.seed);
    Eigen::MatrixXd unmixing = Eigen::MatrixXd::Zero(effective, effective);
    bool converged = true;
    for (int p = 0; p < effective; ++p) {
        Eigen::VectorXd w(effective);
        for (int i = 0; i < effective; ++i)
            w(i) = standard_normal(rng);
        for (int q = 0; q < p; ++q)
            w -= w.dot(unmixing.row(q).transpose()) * unmixing.row(q).transpose();
        w.normalize();

        bool done = false;
        for (int it = 0; it < cfg.max_iterations && !done; ++it) {
            const Eigen::ArrayXd y = (w.transpose() * z).transpose().array();
            const Eigen::ArrayXd g = y.tanh();
            const double mean_derivative = (1.0 - g.square()).mean();
            Eigen::VectorXd next = z * g.matrix() / samples - mean_derivative * w;
            for (int q = 0; q < p; ++q)
                next -= next.dot(unmixing.row(q).transpose()) * unmixing.row(q).transpose();
            const double n = next.norm();
            if (n == 0.0)
                break;
            next /= n;
            done = std::abs(1.0 - std::abs(next.dot(w))) < cfg.tolerance;
            w = next;
        }
        converged = converged && done;
        unmixing.row(p) = w.transpose();
    }

    IcaResult out;
    out.converged = converged;
    out.mixing.resize(x.rows(), rank);
    out.sources.resize(rank, x.cols());
    out.mixing.leftCols(effective) =
        u.leftCols(effective) * sigma.head(effective).asDiagonal() * unmixing.transpose() / std::sqrt(samples);
    out.sources.topRows(effective) = unmixing * z;
    for (int j = effective; j < rank; ++j) {
        out.mixing.col(j) = u.col(j);
        out.sources.row(j) = sigma(j) * v.col(j).transpose();
    }
    return out;
}

}  // namespace detail

/// Rank-r truncated SVD: basis = U_r, coefficients = Sigma_r V_r^T.
inline Factorization truncated_svd(const FlowMatrix& h, int rank)
{
    detail::check_rank(h, rank);
    detail::check_not_degenerate(h);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Factorization fact;
    fact.method = FactorMethod::Svd;
    fact.basis = svd.matrixU().leftCols(rank);
    fact.coefficients = svd.singularValues().head(rank).asDiagonal() * svd.matrixV().leftCols(rank).transpose();
    detail::fix_signs(fact);
    return fact;
}

/// score_j = || H - basis_j * coefficients_j ||_1 (entrywise absolute sum).
inline Eigen::VectorXd column_scores(const FlowMatrix& h, const Factorization& fact)
{
    if (fact.basis.rows() != h.rows() || fact.coefficients.cols() != h.cols())
        throw Error(ErrorCode::InvalidArgument, "factorization shape does not match the flow matrix");
    Eigen::VectorXd scores(fact.rank());
    for (int j = 0; j < fact.rank(); ++j)
        scores(j) = (h - fact.basis.col(j) * fact.coefficients.row(j)).cwiseAbs().sum();
    return scores;
}

/// Column indices by ascending score, ties by lower index.
inline std::vector<int> rank_columns(const Eigen::VectorXd& scores)
{
    std::vector<int> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) < scores(b); });
    return order;
}

inline std::vector<Eigen::VectorXd> select_columns(const Factorization& fact, const Eigen::VectorXd& scores, int count)
{
    if (scores.size() != fact.rank())
        throw Error(ErrorCode::InvalidArgument, "one score per basis column required");
    if (count < 0 || count > fact.rank())
        throw Error(ErrorCode::InvalidArgument, "cannot select " + std::to_string(count) + " of "
                                                    + std::to_string(fact.rank()) + " columns");
    const std::vector<int> order = rank_columns(scores);
    std::vector<Eigen::VectorXd> columns;
    columns.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        columns.emplace_back(fact.basis.col(order[i]));
    return columns;
}

/// FastICA factorization at rank r. Basis columns are unit length, sign
/// normalized, and ordered by ascending column score.
inline Factorization fast_ica(const FlowMatrix& h, int rank, const IcaConfig& cfg = {})
{
    if (h.cols() < 2)
        throw Error(ErrorCode::InvalidArgument, "ICA needs at least two flows");
    if (cfg.max_iterations < 1 || !(cfg.tolerance > 0))
        throw Error(ErrorCode::InvalidArgument, "ICA needs a positive iteration budget and tolerance");
    detail::check_rank(h, rank);
    detail::check_not_degenerate(h);

    Factorization fact;
    fact.method = FactorMethod::Ica;
    if (cfg.axis == IcaAxis::Flows) {
        detail::IcaResult r = detail::fast_ica_core(h, rank, cfg);
        fact.basis = std::move(r.mixing);
        fact.coefficients = std::move(r.sources);
        fact.converged = r.converged;
    } else {
        detail::IcaResult r = detail::fast_ica_core(h.transpose(), rank, cfg);
        fact.basis = r.sources.transpose();
        fact.coefficients = r.mixing.transpose();
        fact.converged = r.converged;
    }
    detail::normalize_basis(fact);
    detail::fix_signs(fact);

    const std::vector<int> order = rank_columns(column_scores(h, fact));
    Factorization sorted = fact;
    for (int j = 0; j < rank; ++j) {
        sorted.basis.col(j) = fact.basis.col(order[j]);
        sorted.coefficients.row(j) = fact.coefficients.row(order[j]);
    }
    return sorted;
}

}  // namespace cellinf
