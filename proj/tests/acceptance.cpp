// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. All work is run twice; the second pass is
// only used for the determinism check.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cellinf/baselines.hpp"
#include "cellinf/harness.hpp"
#include "cellinf/mfci.hpp"
#include "cellinf/synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cellinf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

/// Every trace produced during one pass, keyed by run name.
struct TraceLog {
    fs::path dir;
    std::vector<std::string> names;
    std::vector<std::string> exact;  // names of traces whose loss must be non-increasing
    std::map<std::string, std::vector<double>> losses;

    void add(const std::string& name, const InferenceTrace& trace, bool exact_mode)
    {
        harness::write_trace(harness::to_records(trace, false), dir / (name + ".csv"));
        names.push_back(name);
        if (exact_mode)
            exact.push_back(name);
        std::vector<double>& l = losses[name];
        for (const IterationRecord& r : trace.records)
            l.push_back(r.loss);
    }
};

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* format, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c, d);
    return buf;
}

double final_loss(const InferenceResult& r)
{
    return r.trace.records.back().loss;
}

double final_seconds(const InferenceResult& r)
{
    return r.trace.records.back().cumulative_seconds;
}

Eigen::MatrixXd gaussian(int rows, int cols, Rng& rng)
{
    Eigen::MatrixXd a(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            a(i, j) = standard_normal(rng);
    return a;
}

/// Residual of the best rank-k approximation.
double svd_residual(const Eigen::MatrixXd& f, int k)
{
    const Eigen::VectorXd sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(f).singularValues();
    if (k >= sigma.size())
        return 0.0;
    return sigma.tail(sigma.size() - k).norm();
}

const SolverConfig solver{};

// 1. B1 B2 = 0 and the Hodge decomposition on random complexes.
Outcome algebraic_invariants(TraceLog&)
{
    const auto start = std::chrono::steady_clock::now();
    double worst_recompose = 0.0;
    double worst_orthogonal = 0.0;
    bool boundary_ok = true;
    for (int i = 0; i < 100; ++i) {
        SynthConfig cfg;
        cfg.nodes = 8 + i % 18;
        cfg.edge_probability = i % 2 ? 0.7 : 0.3;
        cfg.cells = 1 + i % 6;
        Rng rng(1000 + static_cast<std::uint64_t>(i));
        const CellComplex complex = random_complex(cfg, rng);
        const Eigen::MatrixXi product = Eigen::MatrixXi(build_incidence(complex.graph()) * complex.boundary_matrix());
        boundary_ok = boundary_ok && product.isZero();

        const Eigen::MatrixXd f = gaussian(complex.graph().edge_count(), 4, rng);
        const Eigen::MatrixXd grad = gradient_component(complex.graph(), f, solver);
        const Eigen::MatrixXd free = f - grad;
        const Eigen::MatrixXd curl = curl_component(complex, free, solver);
        const Eigen::MatrixXd harm = harmonic_projection(complex, free, solver);
        const double scale = f.squaredNorm();
        worst_recompose = std::max(worst_recompose, (grad + curl + harm - f).norm() / f.norm());
        for (const auto& [a, b] : {std::pair{&grad, &curl}, std::pair{&grad, &harm}, std::pair{&curl, &harm}})
            worst_orthogonal = std::max(worst_orthogonal, std::abs((a->transpose() * *b).trace()) / scale);
    }
    const double elapsed = seconds_since(start);
    return {boundary_ok && worst_recompose <= 1e-6 && worst_orthogonal <= 1e-6 && elapsed < 60.0,
            std::string("B1B2=0 ") + (boundary_ok ? "on all 100" : "VIOLATED")
                + fmt(", max recomposition %.2e, max inner product %.2e, %.1fs", worst_recompose, worst_orthogonal,
                      elapsed)};
}

// 2. mfci with every SVD column evaluated matches the best single cycle.
Outcome oracle_equivalence(TraceLog& log)
{
    const auto start = std::chrono::steady_clock::now();
    struct Instance {
        OrientedGraph graph;
        FlowMatrix flows;
    };
    std::vector<Instance> instances;
    {
        const OrientedGraph k4 = fixtures::k4();
        Rng rng(2);
        std::vector<CellBoundary> cells{random_tree_cell(k4, rng)};
        while (cells.size() < 2) {
            CellBoundary c = random_tree_cell(k4, rng);
            if (!c.same_cell(cells[0]))
                cells.push_back(c);
        }
        const CellComplex planted(k4, cells);
        instances.push_back({k4, sample_flows(planted, 8, 1.0, 0.3, rng)});
    }
    for (int i = 0; i < 20; ++i) {
        SynthConfig cfg;
        cfg.nodes = 5 + i % 4;
        cfg.edge_probability = 0.6;
        cfg.cells = 2;
        cfg.flows = 8;
        cfg.sigma_noise = 0.3;
        cfg.seed = 200 + static_cast<std::uint64_t>(i);
        SynthDataset data = generate_dataset(cfg, solver);
        instances.push_back({data.complex.graph(), std::move(data.flows)});
    }

    double worst = 0.0;
    int matched = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const Instance& inst = instances[i];
        const int l = static_cast<int>(std::min<Eigen::Index>(inst.graph.edge_count(), inst.flows.cols()));
        InferenceConfig cfg;
        cfg.total_cells = 1;
        cfg.candidates = l;
        cfg.added_per_iteration = 1;
        cfg.evaluate_candidates = true;
        Rng rng(i + 1);
        const InferenceResult r = infer_mfci(inst.graph, inst.flows, cfg, rng);
        log.add("c2_instance" + std::to_string(i), r.trace, true);
        const double best = oracle::best_single_cycle_loss(inst.graph, oracle::remove_gradient(inst.graph, inst.flows));
        const double gap = std::abs(final_loss(r) - best);
        worst = std::max(worst, gap);
        matched += gap <= 1e-6 ? 1 : 0;
    }
    const double elapsed = seconds_since(start);
    const int total = static_cast<int>(instances.size());
    return {matched == total && elapsed < 120.0,
            fmt("%g of %g instances within 1e-6 of the best simple cycle, max gap %.2e, %.1fs", matched, total, worst,
                elapsed)};
}

// 3. No inferred complex beats the truncated SVD at its cell count.
Outcome eckart_young(TraceLog& log)
{
    int checked = 0;
    int violations = 0;
    double tightest = 1e300;
    for (int i = 0; i < 50; ++i) {
        SynthConfig cfg;
        cfg.nodes = 8 + i % 10;
        cfg.edge_probability = 0.5;
        cfg.cells = 2 + i % 4;
        cfg.flows = 12;
        cfg.sigma_noise = 0.3;
        cfg.seed = 300 + static_cast<std::uint64_t>(i);
        const SynthDataset data = generate_dataset(cfg, solver);
        const OrientedGraph& g = data.complex.graph();
        const Eigen::MatrixXd free = oracle::remove_gradient(g, data.flows);
        const int k = cfg.cells;

        InferenceConfig mcfg;
        mcfg.total_cells = k;
        mcfg.candidates = std::min(3, k);
        mcfg.added_per_iteration = 1;
        Rng rng(static_cast<std::uint64_t>(i));
        std::vector<std::pair<std::string, InferenceResult>> runs;
        runs.emplace_back("mfci", infer_mfci(g, data.flows, mcfg, rng));
        runs.emplace_back("sph", infer_sph(g, data.flows, SphConfig{k, 5, solver}));
        runs.emplace_back("random", infer_random(g, data.flows, k, rng, solver));
        for (const auto& [name, run] : runs) {
            log.add("c3_instance" + std::to_string(i) + "_" + name, run.trace, true);
            for (const IterationRecord& rec : run.trace.records) {
                const double bound = svd_residual(free, rec.cells_total);
                tightest = std::min(tightest, rec.loss - bound);
                violations += rec.loss < bound - 1e-6 ? 1 : 0;
                ++checked;
            }
            const double exact = oracle::loss(run.complex.cells(), free);
            const double bound = svd_residual(free, run.complex.cell_count());
            tightest = std::min(tightest, exact - bound);
            violations += exact < bound - 1e-6 ? 1 : 0;
            ++checked;
        }
    }
    return {violations == 0, fmt("%g of %g complexes below the rank-k SVD residual, smallest margin %.3g", violations,
                                 checked, tightest)};
}

SynthConfig fig2_instance(std::uint64_t seed)
{
    SynthConfig cfg;
    cfg.nodes = 40;
    cfg.edge_probability = 0.9;
    cfg.cells = 50;
    cfg.flows = 64;
    cfg.sigma_cell = 1.0;
    cfg.sigma_noise = 0.3;
    cfg.seed = seed;
    return cfg;
}

InferenceConfig eight_out_of_eight(Projection projection)
{
    InferenceConfig cfg;
    cfg.total_cells = 50;
    cfg.candidates = 8;
    cfg.added_per_iteration = 8;
    cfg.evaluate_candidates = false;
    cfg.method = FactorMethod::Ica;
    cfg.projection = projection;
    return cfg;
}

// 5. mfci(8oo-1, approximate) is solver-free, faster than SPH and beats random.
Outcome speed_separation(TraceLog& log)
{
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> mfci_time, sph_time, mfci_loss, random_loss;
    bool one_call = true;
    long max_calls = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const SynthDataset data = generate_dataset(fig2_instance(seed), solver);
        const OrientedGraph& g = data.complex.graph();
        Rng rng(seed);
        const InferenceResult mfci = infer_mfci(g, data.flows, eight_out_of_eight(Projection::Approximate), rng);
        const InferenceResult sph = infer_sph(g, data.flows, SphConfig{50, 11, solver});
        Rng rrng(seed);
        const InferenceResult random = infer_random(g, data.flows, 50, rrng, solver);
        const std::string tag = "c5_seed" + std::to_string(seed);
        log.add(tag + "_mfci_approx", mfci.trace, false);
        log.add(tag + "_sph", sph.trace, true);
        log.add(tag + "_random", random.trace, true);

        for (const IterationRecord& rec : mfci.trace.records) {
            one_call = one_call && rec.cumulative_solver_calls == 1;
            max_calls = std::max(max_calls, rec.cumulative_solver_calls);
        }
        one_call = one_call && mfci.complex.cell_count() == 50;
        mfci_time.push_back(final_seconds(mfci));
        sph_time.push_back(final_seconds(sph));
        mfci_loss.push_back(final_loss(mfci));
        random_loss.push_back(final_loss(random));
    }
    const double elapsed = seconds_since(start);
    const double mt = median(mfci_time), st = median(sph_time), ml = median(mfci_loss), rl = median(random_loss);
    return {one_call && mt < st && ml <= rl && elapsed < 600.0,
            std::string("solver calls ") + (one_call ? "1" : "max " + std::to_string(max_calls))
                + fmt(", median time mfci %.3fs vs sph %.3fs, median loss mfci %.2f vs random %.2f", mt, st, ml, rl)
                + fmt(", %.1fs", elapsed)};
}

// 6. Relative performance of mfci vs SPH grows with edge noise.
Outcome noise_direction(TraceLog& log)
{
    std::map<double, std::vector<double>> perf;
    int degenerate = 0;
    for (double noise : {0.1, 2.0}) {
        for (std::uint64_t seed = 1; seed <= 7; ++seed) {
            SynthConfig cfg;
            cfg.nodes = 20;
            cfg.edge_probability = 0.9;
            cfg.cells = 30;
            cfg.flows = 64;
            cfg.sigma_cell = 1.0;
            cfg.sigma_noise = noise;
            cfg.seed = seed;
            const SynthDataset data = generate_dataset(cfg, solver);
            const OrientedGraph& g = data.complex.graph();

            InferenceConfig mcfg;
            mcfg.total_cells = 30;
            mcfg.candidates = 5;
            mcfg.added_per_iteration = 1;
            mcfg.method = FactorMethod::Svd;
            mcfg.projection = Projection::Approximate;
            mcfg.discretization = Discretization::Deterministic;
            Rng rng(seed);
            const InferenceResult mfci = infer_mfci(g, data.flows, mcfg, rng);
            const InferenceResult sph = infer_sph(g, data.flows, SphConfig{30, 11, solver});
            Rng rrng(seed);
            const InferenceResult random = infer_random(g, data.flows, 30, rrng, solver);
            const std::string tag = "c6_noise" + io::format_9g(noise) + "_seed" + std::to_string(seed);
            log.add(tag + "_mfci", mfci.trace, false);
            log.add(tag + "_sph", sph.trace, true);
            log.add(tag + "_random", random.trace, true);
            try {
                perf[noise].push_back(harness::relative_performance(final_loss(random), final_loss(mfci), final_loss(sph)));
            } catch (const Error& err) {
                if (err.code() != ErrorCode::DegenerateReference)
                    throw;
                ++degenerate;
            }
        }
    }
    const double low = perf[0.1].empty() ? 0.0 : median(perf[0.1]);
    const double high = perf[2.0].empty() ? 0.0 : median(perf[2.0]);
    std::string detail = fmt("median relative performance %.3f at noise 0.1, %.3f at noise 2.0", low, high);
    if (degenerate)
        detail += ", " + std::to_string(degenerate) + " runs with random no worse than SPH";
    return {degenerate == 0 && high > low, detail};
}

// 7. The approximate update costs little accuracy and saves time.
Outcome approximate_fidelity(TraceLog& log)
{
    std::vector<double> approx_loss, exact_loss, approx_time, exact_time;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const SynthDataset data = generate_dataset(fig2_instance(seed), solver);
        const OrientedGraph& g = data.complex.graph();
        Rng a(seed);
        const InferenceResult approx = infer_mfci(g, data.flows, eight_out_of_eight(Projection::Approximate), a);
        Rng e(seed);
        const InferenceResult exact = infer_mfci(g, data.flows, eight_out_of_eight(Projection::Exact), e);
        const std::string tag = "c7_seed" + std::to_string(seed);
        log.add(tag + "_approx", approx.trace, false);
        log.add(tag + "_exact", exact.trace, true);
        approx_loss.push_back(final_loss(approx));
        exact_loss.push_back(final_loss(exact));
        approx_time.push_back(final_seconds(approx));
        exact_time.push_back(final_seconds(exact));
    }
    const double al = median(approx_loss), el = median(exact_loss), at = median(approx_time), et = median(exact_time);
    return {std::abs(al - el) <= 0.05 * el && at < et,
            fmt("median loss approximate %.3f vs exact %.3f (%+.2f%%)", al, el, 100.0 * (al - el) / el)
                + fmt(", median time %.3fs vs %.3fs", at, et)};
}

// 4. Exact-projection traces never increase.
Outcome monotone(const TraceLog& log)
{
    int bad = 0;
    std::string first;
    for (const std::string& name : log.exact) {
        const std::vector<double>& l = log.losses.at(name);
        for (std::size_t i = 1; i < l.size(); ++i)
            if (l[i] > l[i - 1] + 1e-8) {
                ++bad;
                if (first.empty())
                    first = name;
                break;
            }
    }
    std::string detail = std::to_string(log.exact.size()) + " exact-projection traces, " + std::to_string(bad) + " increasing";
    if (!first.empty())
        detail += " (first: " + first + ")";
    return {bad == 0, detail};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 8. Both passes wrote byte-identical traces.
Outcome determinism(const TraceLog& first, const TraceLog& second)
{
    if (first.names != second.names)
        return {false, "the two passes produced different sets of traces"};
    int differing = 0;
    for (const std::string& name : first.names)
        differing += slurp(first.dir / (name + ".csv")) != slurp(second.dir / (name + ".csv")) ? 1 : 0;
    return {differing == 0,
            std::to_string(first.names.size()) + " trace CSVs compared, " + std::to_string(differing) + " differ"};
}

using Criterion = std::function<Outcome(TraceLog&)>;

}  // namespace

int main(int argc, char** argv)
{
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_traces");
    const std::vector<std::pair<int, Criterion>> criteria = {
        {1, algebraic_invariants}, {2, oracle_equivalence}, {3, eckart_young},
        {5, speed_separation},     {6, noise_direction},    {7, approximate_fidelity},
    };
    const std::map<int, std::string> titles = {
        {1, "algebraic invariants"}, {2, "oracle equivalence"},     {3, "Eckart-Young lower bound"},
        {4, "monotone loss"},        {5, "speed separation"},       {6, "noise-robustness direction"},
        {7, "approximate-update fidelity"}, {8, "determinism"},
    };

    std::map<int, Outcome> outcomes;
    TraceLog pass1, pass2;
    pass1.dir = root / "pass1";
    pass2.dir = root / "pass2";
    fs::remove_all(root);
    fs::create_directories(pass1.dir);
    fs::create_directories(pass2.dir);

    for (const auto& [id, run] : criteria) {
        try {
            outcomes[id] = run(pass1);
        } catch (const std::exception& err) {
            outcomes[id] = {false, std::string("error: ") + err.what()};
        }
    }
    outcomes[4] = monotone(pass1);
    for (const auto& [id, run] : criteria) {
        try {
            run(pass2);
        } catch (const std::exception&) {
        }
    }
    outcomes[8] = determinism(pass1, pass2);

    int failed = 0;
    for (const auto& [id, outcome] : outcomes) {
        std::printf("criterion %d %s: %s: %s\n", id, outcome.pass ? "PASS" : "FAIL", titles.at(id).c_str(),
                    outcome.detail.c_str());
        failed += outcome.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(outcomes.size()) - failed, outcomes.size());
    return failed == 0 ? 0 : 1;
}
