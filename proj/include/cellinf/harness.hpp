#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cellinf/baselines.hpp"
#include "cellinf/complex.hpp"
#include "cellinf/error.hpp"
#include "cellinf/hodge.hpp"
#include "cellinf/io.hpp"
#include "cellinf/mfci.hpp"
#include "cellinf/synth.hpp"
#include "cellinf/trace.hpp"

namespace cellinf::harness {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Metrics

/// (r - a) / (r - b): 0 means no better than random cells, 1 means as good as
/// the reference algorithm.
inline double relative_performance(double random_error, double algo_error, double reference_error)
{
    if (!(random_error > reference_error))
        throw Error(ErrorCode::DegenerateReference, "random error must exceed the reference error");
    return (random_error - algo_error) / (random_error - reference_error);
}

// ---------------------------------------------------------------------------
// Traces

struct TraceRecord {
    int iteration = 0;
    int cells_total = 0;
    double loss = 0.0;
    double cumulative_seconds = 0.0;
    long cumulative_solver_calls = 0;
    long cumulative_solver_iterations = 0;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

inline constexpr const char* kTraceHeader =
    "iteration,cells_total,loss,cumulative_seconds,cumulative_solver_calls,cumulative_solver_iterations";

inline std::vector<TraceRecord> to_records(const InferenceTrace& trace, bool keep_time = true)
{
    std::vector<TraceRecord> out;
    out.reserve(trace.records.size());
    for (const IterationRecord& r : trace.records)
        out.push_back({r.iteration, r.cells_total, r.loss, keep_time ? r.cumulative_seconds : 0.0,
                       r.cumulative_solver_calls, r.cumulative_solver_iterations});
    return out;
}

inline std::string format_record(const TraceRecord& r)
{
    return std::to_string(r.iteration) + ',' + std::to_string(r.cells_total) + ',' + io::format_9g(r.loss) + ','
         + io::format_9g(r.cumulative_seconds) + ',' + std::to_string(r.cumulative_solver_calls) + ','
         + std::to_string(r.cumulative_solver_iterations);
}

/// CSV with kTraceHeader; floats use `%.9g`, so an exact zero is written `0`.
inline void write_trace(const std::vector<TraceRecord>& records, const fs::path& path)
{
    if (records.empty())
        throw Error(ErrorCode::InvalidArgument, "write_trace needs at least one record");
    std::ofstream out = io::detail::open_out(path);
    out << kTraceHeader << '\n';
    for (const TraceRecord& r : records)
        out << format_record(r) << '\n';
    if (!out)
        throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

inline std::vector<TraceRecord> read_trace(const fs::path& path)
{
    const std::vector<std::string> lines = io::detail::read_lines(path);
    if (lines.empty() || lines[0] != kTraceHeader)
        io::detail::parse_error(path, 1, "unexpected trace header");
    std::vector<TraceRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = io::detail::split(lines[i], ',');
        TraceRecord r;
        std::optional<int> it, cells;
        std::optional<double> l, secs;
        std::optional<long> calls, iters;
        if (f.size() == 6) {
            it = io::detail::parse_number<int>(f[0]);
            cells = io::detail::parse_number<int>(f[1]);
            l = io::detail::parse_number<double>(f[2]);
            secs = io::detail::parse_number<double>(f[3]);
            calls = io::detail::parse_number<long>(f[4]);
            iters = io::detail::parse_number<long>(f[5]);
        }
        if (!it || !cells || !l || !secs || !calls || !iters)
            io::detail::parse_error(path, static_cast<long>(i + 1), "malformed trace row");
        out.push_back({*it, *cells, *l, *secs, *calls, *iters});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Datasets

struct DatasetPaths {
    fs::path graph;
    fs::path flows;
    std::optional<fs::path> cells;
};

struct Dataset {
    OrientedGraph graph;
    FlowMatrix flows;
    std::optional<CellComplex> ground_truth;
};

inline Dataset load_dataset(const DatasetPaths& paths)
{
    Dataset data;
    data.graph = io::read_graph(paths.graph);
    data.flows = io::read_flows(paths.flows, data.graph.edge_count());
    if (paths.cells)
        data.ground_truth = io::read_cells(data.graph, *paths.cells);
    return data;
}

inline DatasetPaths dataset_paths(const fs::path& dir)
{
    return {dir / "graph.txt", dir / "flows.csv", dir / "cells.txt"};
}

inline std::vector<std::pair<std::string, std::string>> synth_meta(const SynthDataset& data)
{
    const SynthConfig& c = data.config;
    return {{"n", std::to_string(c.nodes)},
            {"p", io::format_exact(c.edge_probability)},
            {"cells", std::to_string(c.cells)},
            {"flows", std::to_string(c.flows)},
            {"sigma_cell", io::format_exact(c.sigma_cell)},
            {"sigma_noise", io::format_exact(c.sigma_noise)},
            {"seed", std::to_string(c.seed)},
            {"nodes_kept", std::to_string(data.complex.graph().node_count())},
            {"edges", std::to_string(data.complex.graph().edge_count())},
            {"ground_truth_loss", io::format_exact(data.ground_truth_loss)}};
}

/// Writes graph.txt, cells.txt, flows.csv and meta.txt into `dir`.
inline void write_dataset(const SynthDataset& data, const fs::path& dir)
{
    const DatasetPaths paths = dataset_paths(dir);
    io::write_graph(data.complex.graph(), paths.graph);
    io::write_cells(data.complex, *paths.cells);
    io::write_flows(data.flows, paths.flows);
    io::write_meta(synth_meta(data), dir / "meta.txt");
}

// ---------------------------------------------------------------------------
// Configuration: flat `key = value` lines, `#` starts a comment.

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in, const std::string& origin = "<config>")
{
    KeyValues out;
    std::string line;
    long number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string_view body = io::detail::trim(line);
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::ConfigError, origin + ":" + std::to_string(number) + ": expected `key = value`");
        const std::string key(io::detail::trim(body.substr(0, eq)));
        const std::string value(io::detail::trim(body.substr(eq + 1)));
        if (key.empty())
            throw Error(ErrorCode::ConfigError, origin + ":" + std::to_string(number) + ": empty key");
        out[key] = value;
    }
    return out;
}

inline KeyValues read_config_file(const fs::path& path)
{
    std::ifstream in = io::detail::open_in(path);
    return parse_key_values(in, path.string());
}

enum class Algorithm { Mfci, Sph, Random };

inline std::string to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::Mfci: return "mfci";
    case Algorithm::Sph: return "sph";
    case Algorithm::Random: return "random";
    }
    return "unknown";
}

inline Algorithm parse_algorithm(const std::string& s)
{
    if (s == "mfci")
        return Algorithm::Mfci;
    if (s == "sph")
        return Algorithm::Sph;
    if (s == "random")
        return Algorithm::Random;
    throw Error(ErrorCode::ConfigError, "algo: expected mfci, sph or random, got `" + s + "`");
}

enum class DataSource { Synth, Files };

struct ExperimentConfig {
    DataSource source = DataSource::Synth;
    SynthConfig synth;
    DatasetPaths paths;
    Algorithm algorithm = Algorithm::Mfci;
    std::vector<Algorithm> bench_algorithms{Algorithm::Mfci, Algorithm::Sph, Algorithm::Random};
    int total_cells = 1;
    InferenceConfig mfci;
    int sph_candidates = 11;
    SolverConfig solver;
    std::vector<std::uint64_t> seeds{1};
    bool record_time = true;
    fs::path output_dir = "out";

    void validate() const
    {
        if (seeds.empty())
            throw Error(ErrorCode::ConfigError, "run.seeds: at least one seed required");
        std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
        if (distinct.size() != seeds.size())
            throw Error(ErrorCode::ConfigError, "run.seeds: seeds must be distinct");
        if (total_cells < 1)
            throw Error(ErrorCode::ConfigError, "infer.k must be at least 1");
        if (sph_candidates < 1)
            throw Error(ErrorCode::ConfigError, "sph.c must be at least 1");
        solver.validate();
        if (source == DataSource::Synth) {
            synth.validate();
        } else {
            for (const fs::path& p : {paths.graph, paths.flows})
                if (!fs::exists(p))
                    throw Error(ErrorCode::IoError, "data file " + p.string() + " does not exist");
            if (paths.cells && !fs::exists(*paths.cells))
                throw Error(ErrorCode::IoError, "data file " + paths.cells->string() + " does not exist");
        }
    }
};

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(const KeyValues& kv) : kv_(kv) {}

    std::optional<std::string> get(const std::string& key)
    {
        used_.insert(key);
        auto it = kv_.find(key);
        if (it == kv_.end())
            return std::nullopt;
        return it->second;
    }

    template <typename T>
    void number(const std::string& key, T& target)
    {
        if (auto v = get(key)) {
            auto parsed = io::detail::parse_number<T>(*v);
            if (!parsed)
                throw Error(ErrorCode::ConfigError, key + ": `" + *v + "` is not a valid number");
            target = *parsed;
        }
    }

    void flag(const std::string& key, bool& target)
    {
        if (auto v = get(key)) {
            if (*v == "true" || *v == "1" || *v == "yes")
                target = true;
            else if (*v == "false" || *v == "0" || *v == "no")
                target = false;
            else
                throw Error(ErrorCode::ConfigError, key + ": expected true or false, got `" + *v + "`");
        }
    }

    template <typename Enum>
    void choice(const std::string& key, Enum& target, std::initializer_list<std::pair<const char*, Enum>> options)
    {
        if (auto v = get(key)) {
            for (const auto& [name, value] : options)
                if (*v == name) {
                    target = value;
                    return;
                }
            std::string names;
            for (const auto& [name, value] : options)
                names += std::string(names.empty() ? "" : "|") + name;
            throw Error(ErrorCode::ConfigError, key + ": expected " + names + ", got `" + *v + "`");
        }
    }

    void reject_unknown() const
    {
        for (const auto& [key, value] : kv_)
            if (!used_.count(key))
                throw Error(ErrorCode::ConfigError, "unknown key `" + key + "`");
    }

private:
    const KeyValues& kv_;
    std::set<std::string> used_;
};

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    for (std::string_view part : io::detail::split(s, ','))
        if (!part.empty())
            out.emplace_back(part);
    return out;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const KeyValues& kv)
{
    ExperimentConfig cfg;
    detail::ConfigReader r(kv);

    r.choice("data.source", cfg.source, {{"synth", DataSource::Synth}, {"files", DataSource::Files}});
    if (auto v = r.get("data.graph"))
        cfg.paths.graph = *v;
    if (auto v = r.get("data.flows"))
        cfg.paths.flows = *v;
    if (auto v = r.get("data.cells"))
        cfg.paths.cells = fs::path(*v);
    r.number("synth.n", cfg.synth.nodes);
    r.number("synth.p", cfg.synth.edge_probability);
    r.number("synth.cells", cfg.synth.cells);
    r.number("synth.flows", cfg.synth.flows);
    r.number("synth.sigma_cell", cfg.synth.sigma_cell);
    r.number("synth.sigma_noise", cfg.synth.sigma_noise);

    if (auto v = r.get("algo"))
        cfg.algorithm = parse_algorithm(*v);
    if (auto v = r.get("bench.algos")) {
        cfg.bench_algorithms.clear();
        for (const std::string& name : detail::split_list(*v))
            cfg.bench_algorithms.push_back(parse_algorithm(name));
        if (cfg.bench_algorithms.empty())
            throw Error(ErrorCode::ConfigError, "bench.algos: at least one algorithm required");
    }
    r.number("infer.k", cfg.total_cells);

    InferenceConfig& m = cfg.mfci;
    r.number("mfci.l", m.candidates);
    m.added_per_iteration = m.candidates;
    r.number("mfci.l_prime", m.added_per_iteration);
    int rank = 0;
    r.number("mfci.rank", rank);
    if (rank > 0)
        m.rank = rank;
    r.choice("mfci.method", m.method, {{"svd", FactorMethod::Svd}, {"ica", FactorMethod::Ica}});
    r.choice("mfci.ica_axis", m.ica.axis, {{"flows", IcaAxis::Flows}, {"edges", IcaAxis::Edges}});
    r.number("ica.max_iterations", m.ica.max_iterations);
    r.number("ica.tolerance", m.ica.tolerance);
    r.choice("mfci.discretization", m.discretization,
             {{"deterministic", Discretization::Deterministic}, {"random_walk", Discretization::RandomWalk}});
    r.flag("mfci.evaluate", m.evaluate_candidates);
    r.choice("mfci.projection", m.projection, {{"exact", Projection::Exact}, {"approximate", Projection::Approximate}});
    r.number("sph.c", cfg.sph_candidates);

    r.number("solver.tolerance", cfg.solver.residual_tolerance);
    long max_iterations = 0;
    r.number("solver.max_iterations", max_iterations);
    if (max_iterations != 0)
        cfg.solver.max_iterations = max_iterations;

    if (auto v = r.get("run.seeds")) {
        cfg.seeds.clear();
        for (const std::string& s : detail::split_list(*v)) {
            auto seed = io::detail::parse_number<std::uint64_t>(s);
            if (!seed)
                throw Error(ErrorCode::ConfigError, "run.seeds: `" + s + "` is not a valid seed");
            cfg.seeds.push_back(*seed);
        }
    }
    int repetitions = 0;
    r.number("run.repetitions", repetitions);
    if (repetitions > 0) {
        if (kv.count("run.seeds"))
            throw Error(ErrorCode::ConfigError, "give either run.seeds or run.repetitions, not both");
        cfg.seeds.clear();
        for (int i = 1; i <= repetitions; ++i)
            cfg.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    r.flag("run.timing", cfg.record_time);
    if (auto v = r.get("output.dir"))
        cfg.output_dir = *v;
    r.reject_unknown();

    m.total_cells = cfg.total_cells;
    m.solver = cfg.solver;
    return cfg;
}

// ---------------------------------------------------------------------------
// Runs

struct RepetitionResult {
    Algorithm algorithm = Algorithm::Mfci;
    std::uint64_t seed = 0;
    std::vector<TraceRecord> records;
    CellComplex complex;
    std::string stop_reason;
    std::optional<double> ground_truth_loss;
    fs::path trace_path;
};

/// Data for one repetition: synthetic data is regenerated from the seed.
inline Dataset dataset_for_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                                std::optional<double>* ground_truth_loss = nullptr)
{
    if (cfg.source == DataSource::Files) {
        Dataset data = load_dataset(cfg.paths);
        if (ground_truth_loss && data.ground_truth)
            *ground_truth_loss = loss(*data.ground_truth, remove_gradient(data.graph, data.flows, cfg.solver), cfg.solver);
        return data;
    }
    SynthConfig synth = cfg.synth;
    synth.seed = seed;
    SynthDataset generated = generate_dataset(synth, cfg.solver);
    if (ground_truth_loss)
        *ground_truth_loss = generated.ground_truth_loss;
    return {generated.complex.graph(), std::move(generated.flows), generated.complex};
}

/// Runs one algorithm on prepared data. The algorithm RNG is seeded with `seed`.
inline InferenceResult run_algorithm(const ExperimentConfig& cfg, Algorithm algorithm, const Dataset& data,
                                     std::uint64_t seed)
{
    Rng rng(seed);
    switch (algorithm) {
    case Algorithm::Mfci:
        return infer_mfci(data.graph, data.flows, cfg.mfci, rng);
    case Algorithm::Sph:
        return infer_sph(data.graph, data.flows, SphConfig{cfg.total_cells, cfg.sph_candidates, cfg.solver});
    case Algorithm::Random:
        return infer_random(data.graph, data.flows, cfg.total_cells, rng, cfg.solver);
    }
    throw Error(ErrorCode::ConfigError, "unknown algorithm");
}

inline std::string trace_file_name(Algorithm algorithm, std::uint64_t seed)
{
    return "trace_" + to_string(algorithm) + "_seed" + std::to_string(seed) + ".csv";
}

inline std::string summary_header()
{
    return "algo,seed,cells,final_loss,cumulative_seconds,cumulative_solver_calls,cumulative_solver_iterations,"
           "ground_truth_loss,stop_reason";
}

inline std::string summary_line(const RepetitionResult& r)
{
    const TraceRecord& last = r.records.back();
    return to_string(r.algorithm) + ',' + std::to_string(r.seed) + ',' + std::to_string(last.cells_total) + ','
         + io::format_9g(last.loss) + ',' + io::format_9g(last.cumulative_seconds) + ','
         + std::to_string(last.cumulative_solver_calls) + ',' + std::to_string(last.cumulative_solver_iterations) + ','
         + (r.ground_truth_loss ? io::format_9g(*r.ground_truth_loss) : std::string()) + ',' + r.stop_reason;
}

/// One repetition per seed for each listed algorithm. Writes
/// trace_<algo>_seed<seed>.csv, cells_<algo>_seed<seed>.txt and summary.csv
/// into the output directory and echoes each summary line to `log`.
inline std::vector<RepetitionResult> run_experiment(const ExperimentConfig& cfg, const std::vector<Algorithm>& algorithms,
                                                    std::ostream* log = nullptr)
{
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    std::vector<RepetitionResult> results;
    for (std::uint64_t seed : cfg.seeds) {
        std::optional<double> ground_truth;
        const Dataset data = dataset_for_seed(cfg, seed, &ground_truth);
        for (Algorithm algorithm : algorithms) {
            InferenceResult run = run_algorithm(cfg, algorithm, data, seed);
            RepetitionResult rep;
            rep.algorithm = algorithm;
            rep.seed = seed;
            rep.records = to_records(run.trace, cfg.record_time);
            rep.complex = std::move(run.complex);
            rep.stop_reason = run.trace.stop_reason;
            rep.ground_truth_loss = ground_truth;
            rep.trace_path = cfg.output_dir / trace_file_name(algorithm, seed);
            write_trace(rep.records, rep.trace_path);
            io::write_cells(rep.complex,
                            cfg.output_dir / ("cells_" + to_string(algorithm) + "_seed" + std::to_string(seed) + ".txt"));
            if (log)
                *log << summary_line(rep) << '\n';
            results.push_back(std::move(rep));
        }
    }
    std::ofstream summary = io::detail::open_out(cfg.output_dir / "summary.csv");
    summary << summary_header() << '\n';
    for (const RepetitionResult& r : results)
        summary << summary_line(r) << '\n';
    return results;
}

inline std::vector<RepetitionResult> run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr)
{
    return run_experiment(cfg, {cfg.algorithm}, log);
}

/// Every (algorithm, seed) pair from bench.algos x run.seeds, plus a combined
/// bench.csv whose rows are trace rows prefixed with `algo,seed`.
inline std::vector<RepetitionResult> run_bench(const ExperimentConfig& cfg, std::ostream* log = nullptr)
{
    std::vector<RepetitionResult> results = run_experiment(cfg, cfg.bench_algorithms, log);
    std::ofstream out = io::detail::open_out(cfg.output_dir / "bench.csv");
    out << "algo,seed," << kTraceHeader << '\n';
    for (const RepetitionResult& r : results)
        for (const TraceRecord& record : r.records)
            out << to_string(r.algorithm) << ',' << r.seed << ',' << format_record(record) << '\n';
    return results;
}

/// Loss of a stored cell file against stored flows, after gradient removal.
inline double evaluate_cells(const DatasetPaths& paths, const SolverConfig& solver = {})
{
    if (!paths.cells)
        throw Error(ErrorCode::ConfigError, "evaluation needs a cell file");
    const Dataset data = load_dataset(paths);
    return loss(*data.ground_truth, remove_gradient(data.graph, data.flows, solver), solver);
}

}  // namespace cellinf::harness
