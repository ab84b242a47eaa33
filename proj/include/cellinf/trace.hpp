#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "cellinf/complex.hpp"
#include "cellinf/hodge.hpp"

namespace cellinf {

struct IterationRecord {
    int iteration = 0;
    int cells_total = 0;
    std::vector<CellBoundary> cells_added;
    double loss = 0.0;  ///< exact harmonic norm after this iteration
    double cumulative_seconds = 0.0;
    long cumulative_solver_calls = 0;
    long cumulative_solver_iterations = 0;
    int candidates_found = 0;
    int candidates_dropped = 0;  ///< discretization failures and duplicates
    bool degenerate_span = false;
};

struct InferenceTrace {
    std::vector<IterationRecord> records;
    std::string stop_reason;
};

struct InferenceResult {
    CellComplex complex;
    InferenceTrace trace;
};

/// Wall clock that can be paused around work excluded from timing.
class Stopwatch {
public:
    using Clock = std::chrono::steady_clock;

    void start() { started_ = Clock::now(); running_ = true; }

    void pause()
    {
        if (running_)
            elapsed_ += Clock::now() - started_;
        running_ = false;
    }

    double seconds() const
    {
        auto total = elapsed_;
        if (running_)
            total += Clock::now() - started_;
        return std::chrono::duration<double>(total).count();
    }

private:
    Clock::time_point started_{};
    Clock::duration elapsed_{};
    bool running_ = false;
};

namespace detail {

inline IterationRecord make_record(int iteration, const CellComplex& complex, std::vector<CellBoundary> added,
                                   double loss_value, const Stopwatch& clock, const SolveStats& stats)
{
    IterationRecord record;
    record.iteration = iteration;
    record.cells_total = complex.cell_count();
    record.cells_added = std::move(added);
    record.loss = loss_value;
    record.cumulative_seconds = clock.seconds();
    record.cumulative_solver_calls = stats.calls;
    record.cumulative_solver_iterations = stats.iterations;
    return record;
}

}  // namespace detail

}  // namespace cellinf
