// Experiment-runner CLI for the LAGO toolkit.
//
// Subcommands: graph, synth, solve, eval, sweep. Exit codes: 0 success,
// 1 usage error, 2 data error, 3 solver failure. LAGO_OUT_DIR sets the
// default output directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lago/lago.hpp"

namespace {

namespace fs = std::filesystem;

std::string default_out_dir() {
    if (const char* env = std::getenv("LAGO_OUT_DIR"); env && *env) return env;
    return ".";
}

std::vector<double> parse_value_list(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string field;
    while (std::getline(ss, field, ','))
        values.push_back(lago::detail::parse_double(field, "value list"));
    return values;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(csv);
    std::string field;
    while (std::getline(ss, field, ',')) seeds.push_back(std::stoull(lago::detail::trim(field)));
    return seeds;
}

struct GraphArgs {
    std::string dist_path;
    double r = 0.0;
    std::string out_dir;
};

int cmd_graph(const GraphArgs& args) {
    const auto d = lago::load_distance_matrix_file(args.dist_path);
    const auto g = lago::build_graph(d, args.r);
    std::cout << "graph over " << g.size() << " languages at r = " << args.r << ":\n";
    if (g.edges.empty()) {
        std::cout << "  (no edges)\n";
    } else {
        for (const auto& [i, j] : g.edges)
            std::cout << "  " << g.labels[static_cast<std::size_t>(i)] << " -- "
                      << g.labels[static_cast<std::size_t>(j)]
                      << "  (distance " << d.values(i, j) << ")\n";
    }
    const fs::path out = fs::path(args.out_dir) / "graph.json";
    fs::create_directories(out.parent_path().empty() ? "." : out.parent_path());
    std::ofstream f(out);
    if (!f) throw lago::DataError("cannot write '" + out.string() + "'");
    f << lago::graph_to_json(g).dump(2) << '\n';
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

struct SynthArgs {
    lago::SynthSpec spec;
    bool complete = false;
    bool path = false;
    std::string dist_path;
    double r = 0.0;
    std::string deviation = "shared";
    std::string out_dir;
};

int cmd_synth(SynthArgs args) {
    if (args.complete) {
        args.spec.graph = lago::make_complete_graph(args.spec.n_nodes);
    } else if (args.path) {
        args.spec.graph = lago::make_path_graph(args.spec.n_nodes);
    } else if (!args.dist_path.empty()) {
        const auto d = lago::load_distance_matrix_file(args.dist_path);
        args.spec.graph = lago::build_graph(d, args.r);
        if (args.spec.graph.size() != args.spec.n_nodes)
            throw lago::ConfigError("distance matrix has " +
                                    std::to_string(args.spec.graph.size()) +
                                    " languages but --nodes is " +
                                    std::to_string(args.spec.n_nodes));
    } else {
        throw lago::ConfigError("choose a topology: --complete, --path, or --dist + --r");
    }
    if (args.deviation == "shared") {
        args.spec.deviation = lago::SynthSpec::Deviation::shared;
    } else if (args.deviation == "distance_weighted") {
        args.spec.deviation = lago::SynthSpec::Deviation::distance_weighted;
    } else {
        throw lago::ConfigError("unknown deviation mode '" + args.deviation + "'");
    }
    const auto inst = lago::generate(args.spec);
    lago::export_instance(args.spec, inst, args.out_dir);
    std::cout << "wrote instance (" << args.spec.n_nodes << " nodes, m=" << args.spec.m
              << ", n=" << args.spec.n << ") under " << args.out_dir << '\n';
    return 0;
}

struct SolveOverrides {
    std::optional<std::string> method;
    std::optional<double> c, lambda, epsilon, eta, alpha, noise_scale;
    std::optional<int> max_iters, threads;
    std::optional<std::string> seeds, noise;
    bool record_trace = false;
    bool save_maps = false;
    bool warm_start = false;
    std::string out_dir;
};

lago::ExperimentConfig load_config(const std::string& path, const SolveOverrides& ov) {
    std::ifstream in(path);
    if (!in) throw lago::DataError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw lago::DataError("malformed config JSON: " + std::string(e.what()));
    }
    auto cfg = lago::config_from_json(j);
    if (ov.method) cfg.method = lago::parse_method(*ov.method);
    if (ov.c) cfg.solver.c = *ov.c;
    if (ov.lambda) cfg.solver.lambda = *ov.lambda;
    if (ov.epsilon) cfg.solver.epsilon = *ov.epsilon;
    if (ov.eta) cfg.solver.eta = *ov.eta;
    if (ov.alpha) cfg.solver.alpha = *ov.alpha;
    if (ov.max_iters) cfg.solver.max_iters = *ov.max_iters;
    if (ov.threads) cfg.threads = *ov.threads;
    if (ov.seeds) cfg.seeds = parse_seed_list(*ov.seeds);
    if (ov.noise) cfg.noise.mechanism = lago::parse_noise_mechanism(*ov.noise);
    if (ov.noise_scale) cfg.noise.scale = *ov.noise_scale;
    if (ov.record_trace) cfg.record_trace = true;
    if (ov.save_maps) cfg.save_maps = true;
    if (ov.warm_start) cfg.solver.warm_start = true;
    if (!ov.out_dir.empty()) cfg.output_dir = ov.out_dir;
    if (cfg.output_dir.empty()) cfg.output_dir = default_out_dir();
    return cfg;
}

int cmd_solve(const std::string& config_path, const SolveOverrides& ov) {
    const auto cfg = load_config(config_path, ov);
    const auto report = lago::run_experiment(cfg);
    lago::write_report(report, cfg.output_dir);
    std::cout << "method " << lago::method_name(cfg.method) << " over " << cfg.seeds.size()
              << " seed(s): mean cosine " << report.mean_cosine.mean << " (std "
              << report.mean_cosine.stddev << "), mean rel error "
              << report.mean_rel_error.mean << ", max violation "
              << report.max_violation_agg.mean << '\n';
    std::cout << "wall time " << report.timing.wall_total_s << " s; wrote report.json, "
              << "report.csv, timing.json under " << cfg.output_dir << '\n';
    return 0;
}

struct EvalArgs {
    std::string ev_path, ea_path, map_path;
    std::string candidate_path, reference_path;
    std::string json_out;
};

int cmd_eval(const EvalArgs& args) {
    const bool embedding_mode = !args.ev_path.empty();
    const bool rouge_mode = !args.candidate_path.empty();
    if (embedding_mode == rouge_mode)
        throw lago::ConfigError(
            "eval needs either --ev/--ea/--map or --candidate/--reference");

    nlohmann::json out;
    if (embedding_mode) {
        if (args.ea_path.empty() || args.map_path.empty())
            throw lago::ConfigError("eval embedding mode needs --ev, --ea and --map");
        const auto ev = lago::read_matrix_binary_file(args.ev_path, lago::MatrixKind::embedding);
        const auto ea = lago::read_matrix_binary_file(args.ea_path, lago::MatrixKind::embedding);
        const auto w =
            lago::read_matrix_binary_file(args.map_path, lago::MatrixKind::alignment_map);
        const auto aligned = lago::apply_alignment(ev, w);
        const auto cos = lago::mean_cosine(aligned, ea);
        const double rel = (aligned - ea).norm() / std::max(ea.norm(), 1e-12);
        std::cout << "mean cosine: " << cos.mean << " (degenerate rows: "
                  << cos.degenerate_rows << ")\n";
        std::cout << "relative error: " << rel << '\n';
        out = {{"mean_cosine", cos.mean},
               {"degenerate_rows", cos.degenerate_rows},
               {"rel_error", rel}};
    } else {
        if (args.reference_path.empty())
            throw lago::ConfigError("eval rouge mode needs --candidate and --reference");
        const auto read_text = [](const std::string& path) {
            std::ifstream in(path);
            if (!in) throw lago::DataError("cannot open text file '" + path + "'");
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        const auto cand = lago::whitespace_tokenize(read_text(args.candidate_path));
        const auto ref = lago::whitespace_tokenize(read_text(args.reference_path));
        const auto score = lago::rouge_l(cand, ref);
        std::cout << "Rouge-L precision: " << score.precision << '\n';
        std::cout << "Rouge-L recall:    " << score.recall << '\n';
        std::cout << "Rouge-L F1:        " << score.f1 << '\n';
        std::cout << "Rouge-L (x100, F1): " << 100.0 * score.f1 << '\n';
        out = {{"precision", score.precision},
               {"recall", score.recall},
               {"f1", score.f1},
               {"f1_x100", 100.0 * score.f1}};
    }
    if (!args.json_out.empty()) {
        std::ofstream f(args.json_out);
        if (!f) throw lago::DataError("cannot write '" + args.json_out + "'");
        f << out.dump(2) << '\n';
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const SolveOverrides& ov,
              const std::string& param, const std::string& values_csv) {
    auto cfg = load_config(config_path, ov);
    const auto values = parse_value_list(values_csv);
    const auto sweep = lago::run_sweep(cfg, param, values);
    lago::write_sweep(sweep, cfg.output_dir);
    std::cout << "sweep over " << param << " (" << values.size() << " values x "
              << cfg.seeds.size() << " seeds):\n";
    for (const auto& [v, agg] : sweep.cosine_by_value)
        std::cout << "  " << param << " = " << v << ": mean cosine " << agg.mean << " (std "
                  << agg.stddev << ")\n";
    std::cout << "wrote report.json, report.csv under " << cfg.output_dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LAGO: graph-constrained few-shot cross-lingual alignment toolkit"};
    app.require_subcommand(1);

    GraphArgs graph_args;
    graph_args.out_dir = default_out_dir();
    auto* graph_cmd = app.add_subcommand("graph", "threshold a distance matrix into a graph");
    graph_cmd->add_option("--dist", graph_args.dist_path, "distance matrix CSV")->required();
    graph_cmd->add_option("--r", graph_args.r, "similarity threshold")->required();
    graph_cmd->add_option("--out-dir", graph_args.out_dir, "output directory");

    SynthArgs synth_args;
    synth_args.out_dir = default_out_dir();
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic instance");
    synth_cmd->add_option("--nodes", synth_args.spec.n_nodes, "number of language nodes")
        ->required();
    synth_cmd->add_option("--m", synth_args.spec.m, "victim embedding dim")->required();
    synth_cmd->add_option("--n", synth_args.spec.n, "attack embedding dim")->required();
    synth_cmd->add_option("--b-train", synth_args.spec.b_train, "train samples per node")
        ->required();
    synth_cmd->add_option("--b-test", synth_args.spec.b_test, "test samples per node")
        ->required();
    synth_cmd->add_option("--delta", synth_args.spec.delta, "cross-node deviation scale");
    synth_cmd->add_option("--sigma", synth_args.spec.sigma, "observation noise scale");
    synth_cmd->add_option("--seed", synth_args.spec.seed, "generator seed");
    synth_cmd->add_flag("--complete", synth_args.complete, "complete graph topology");
    synth_cmd->add_flag("--path", synth_args.path, "path graph topology");
    synth_cmd->add_option("--dist", synth_args.dist_path, "distance matrix CSV for topology");
    synth_cmd->add_option("--r", synth_args.r, "threshold for --dist topology");
    synth_cmd->add_option("--deviation", synth_args.deviation,
                          "deviation mode: shared|distance_weighted");
    synth_cmd->add_option("--out-dir", synth_args.out_dir, "output directory");

    std::string solve_config;
    SolveOverrides ov;
    auto* solve_cmd = app.add_subcommand("solve", "run a config-driven experiment");
    solve_cmd->add_option("--config", solve_config, "experiment config JSON")->required();
    const auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--method", ov.method, "closed|pdmm|tv");
        cmd->add_option("--c", ov.c, "PDMM convergence parameter");
        cmd->add_option("--lambda", ov.lambda, "ridge weight");
        cmd->add_option("--epsilon", ov.epsilon, "PDMM constraint bound");
        cmd->add_option("--eta", ov.eta, "TV weight");
        cmd->add_option("--alpha", ov.alpha, "TV learning rate");
        cmd->add_option("--max-iters", ov.max_iters, "iteration budget");
        cmd->add_option("--seeds", ov.seeds, "comma-separated seed list");
        cmd->add_option("--threads", ov.threads, "worker threads across seeds");
        cmd->add_option("--noise", ov.noise, "noise mechanism none|gaussian|laplace");
        cmd->add_option("--noise-scale", ov.noise_scale, "noise scale");
        cmd->add_flag("--record-trace", ov.record_trace, "write solver traces");
        cmd->add_flag("--save-maps", ov.save_maps, "write alignment maps");
        cmd->add_flag("--warm-start", ov.warm_start, "TV warm start from ridge");
        cmd->add_option("--out-dir", ov.out_dir, "output directory");
    };
    add_overrides(solve_cmd);

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "score stored maps or token sequences");
    eval_cmd->add_option("--ev", eval_args.ev_path, "victim embeddings (binary)");
    eval_cmd->add_option("--ea", eval_args.ea_path, "attack embeddings (binary)");
    eval_cmd->add_option("--map", eval_args.map_path, "alignment map (binary)");
    eval_cmd->add_option("--candidate", eval_args.candidate_path, "candidate text file");
    eval_cmd->add_option("--reference", eval_args.reference_path, "reference text file");
    eval_cmd->add_option("--json", eval_args.json_out, "write metrics JSON here");

    std::string sweep_config, sweep_param, sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep one parameter over values");
    sweep_cmd->add_option("--config", sweep_config, "experiment config JSON")->required();
    sweep_cmd->add_option("--param", sweep_param, "epsilon|eta|lambda|alpha|c|b_train")
        ->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
    add_overrides(sweep_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    const char* stage = "setup";
    try {
        if (graph_cmd->parsed()) {
            stage = "graph";
            return cmd_graph(graph_args);
        }
        if (synth_cmd->parsed()) {
            stage = "synth";
            return cmd_synth(synth_args);
        }
        if (solve_cmd->parsed()) {
            stage = "solve";
            return cmd_solve(solve_config, ov);
        }
        if (eval_cmd->parsed()) {
            stage = "eval";
            return cmd_eval(eval_args);
        }
        if (sweep_cmd->parsed()) {
            stage = "sweep";
            return cmd_sweep(sweep_config, ov, sweep_param, sweep_values);
        }
    } catch (const lago::ConfigError& e) {
        std::cerr << "usage error in stage '" << stage << "': " << e.what() << '\n';
        return 1;
    } catch (const lago::SolverError& e) {
        std::cerr << "solver failure in stage '" << stage << "': " << e.what() << '\n';
        return 3;
    } catch (const lago::Error& e) {
        std::cerr << "data error in stage '" << stage << "': " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error in stage '" << stage << "': " << e.what() << '\n';
        return 2;
    }
    return 0;
}
