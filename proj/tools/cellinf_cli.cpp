// Command line front end: synth, infer, eval, bench.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cellinf/harness.hpp"

namespace {

using namespace cellinf;
namespace fs = std::filesystem;

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string algo;
    bool no_timing = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_algo)
{
    cmd->add_option("--config", opts.config, "key = value configuration file");
    cmd->add_option("--out", opts.out, "output directory (overrides output.dir)");
    cmd->add_option("--seed", opts.seed, "single seed (overrides run.seeds)");
    if (with_algo)
        cmd->add_option("--algo", opts.algo, "mfci | sph | random (overrides algo)");
    cmd->add_flag("--no-timing", opts.no_timing, "write 0 for cumulative_seconds so traces are byte-reproducible");
}

harness::ExperimentConfig load_config(const CommonOptions& opts)
{
    harness::KeyValues kv;
    if (!opts.config.empty())
        kv = harness::read_config_file(opts.config);
    harness::ExperimentConfig cfg = harness::parse_experiment_config(kv);
    if (!opts.out.empty())
        cfg.output_dir = opts.out;
    if (opts.seed)
        cfg.seeds = {*opts.seed};
    if (!opts.algo.empty())
        cfg.algorithm = harness::parse_algorithm(opts.algo);
    if (opts.no_timing)
        cfg.record_time = false;
    return cfg;
}

int run_synth(const CommonOptions& opts)
{
    harness::ExperimentConfig cfg = load_config(opts);
    SynthConfig synth = cfg.synth;
    synth.seed = cfg.seeds.front();
    const SynthDataset data = generate_dataset(synth, cfg.solver);
    harness::write_dataset(data, cfg.output_dir);
    std::cout << "wrote dataset to " << cfg.output_dir.string() << ": nodes=" << data.complex.graph().node_count()
              << " edges=" << data.complex.graph().edge_count() << " cells=" << data.complex.cell_count()
              << " ground_truth_loss=" << io::format_9g(data.ground_truth_loss) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cell complex inference from edge flows"};
    app.require_subcommand(1);

    CommonOptions synth_opts, infer_opts, bench_opts;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(synth, synth_opts, false);
    auto* infer = app.add_subcommand("infer", "run one algorithm over the configured seeds");
    add_common(infer, infer_opts, true);
    auto* bench = app.add_subcommand("bench", "sweep bench.algos x run.seeds into one CSV");
    add_common(bench, bench_opts, false);

    auto* eval = app.add_subcommand("eval", "loss of a cell file against flows");
    std::string eval_config, graph_path, cells_path, flows_path;
    eval->add_option("--config", eval_config, "configuration providing data.graph, data.flows, data.cells");
    eval->add_option("--graph", graph_path, "edge list file");
    eval->add_option("--cells", cells_path, "cell triplet file");
    eval->add_option("--flows", flows_path, "flow CSV file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return run_synth(synth_opts);
        if (infer->parsed()) {
            const harness::ExperimentConfig cfg = load_config(infer_opts);
            std::cout << harness::summary_header() << '\n';
            harness::run_experiment(cfg, &std::cout);
            return 0;
        }
        if (bench->parsed()) {
            const harness::ExperimentConfig cfg = load_config(bench_opts);
            std::cout << harness::summary_header() << '\n';
            harness::run_bench(cfg, &std::cout);
            return 0;
        }
        if (eval->parsed()) {
            harness::ExperimentConfig cfg =
                harness::parse_experiment_config(eval_config.empty() ? harness::KeyValues{}
                                                                     : harness::read_config_file(eval_config));
            harness::DatasetPaths paths = cfg.paths;
            if (!graph_path.empty())
                paths.graph = graph_path;
            if (!flows_path.empty())
                paths.flows = flows_path;
            if (!cells_path.empty())
                paths.cells = fs::path(cells_path);
            if (paths.graph.empty() || paths.flows.empty() || !paths.cells)
                throw Error(ErrorCode::ConfigError, "eval needs --graph, --flows and --cells");
            const double value = harness::evaluate_cells(paths, cfg.solver);
            std::cout << "loss " << io::format_9g(value) << '\n';
            return 0;
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}
