#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/align.hpp"
#include "lago/graph.hpp"
#include "lago/metrics.hpp"
#include "lago/noise.hpp"
#include "lago/pdmm.hpp"
#include "lago/synth.hpp"
#include "lago/tv.hpp"

// Config-driven experiment pipeline: per seed, build or load an instance,
// optionally noise the victim embeddings, run the chosen solver, and score
// the maps on held-out data. Seeds may run in parallel; every value in
// report.json is independent of the thread count, so identical configs give
// byte-identical reports. Wall-clock goes to a separate timing file.

namespace lago {

enum class Method { closed, pdmm, tv };

inline Method parse_method(const std::string& name) {
    if (name == "closed") return Method::closed;
    if (name == "pdmm") return Method::pdmm;
    if (name == "tv") return Method::tv;
    throw ConfigError("unknown method '" + name + "' (closed|pdmm|tv)");
}

inline std::string method_name(Method m) {
    switch (m) {
        case Method::closed: return "closed";
        case Method::pdmm: return "pdmm";
        case Method::tv: return "tv";
    }
    return "closed";
}

struct SolverParams {
    double c = 0.4;
    double lambda = 0.01;
    double epsilon = 0.01;
    double eta = 0.01;
    double alpha = 0.01;
    int max_iters = 500;
    std::optional<double> stop_tol;
    bool warm_start = false;
};

struct NoiseSpec {
    NoiseMechanism mechanism = NoiseMechanism::none;
    double scale = 0.0;
};

struct ExperimentConfig {
    std::optional<SynthSpec> synth;       // per-run seed overrides spec.seed
    std::optional<std::string> manifest;  // or a fixed on-disk instance
    Method method = Method::closed;
    SolverParams solver;
    std::vector<std::uint64_t> seeds{1};
    NoiseSpec noise;
    int threads = 1;
    bool record_trace = false;
    bool save_maps = false;
    std::string output_dir;

    const SynthSpec& synth_spec() const {
        if (!synth) throw ConfigError("config has no synth data source");
        return *synth;
    }
};

struct SeedRow {
    std::uint64_t seed = 0;
    EvalResult eval;
};

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation; 0 for a single seed
};

struct StageTimings {
    double instance_s = 0.0;
    double solve_s = 0.0;
    double eval_s = 0.0;
    double wall_total_s = 0.0;
};

struct ExperimentReport {
    nlohmann::json config_echo;
    std::vector<SeedRow> rows;
    Aggregate mean_cosine;
    Aggregate mean_rel_error;
    Aggregate objective;
    Aggregate max_violation_agg;
    StageTimings timing;  // not serialized into report.json
};

// ---- config (de)serialization ------------------------------------------

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    if (cfg.synth) j["data"]["synth"] = spec_to_json(*cfg.synth);
    if (cfg.manifest) j["data"]["manifest"] = *cfg.manifest;
    j["method"] = method_name(cfg.method);
    nlohmann::json s;
    s["c"] = cfg.solver.c;
    s["lambda"] = cfg.solver.lambda;
    s["epsilon"] = cfg.solver.epsilon;
    s["eta"] = cfg.solver.eta;
    s["alpha"] = cfg.solver.alpha;
    s["max_iters"] = cfg.solver.max_iters;
    if (cfg.solver.stop_tol) s["stop_tol"] = *cfg.solver.stop_tol;
    s["warm_start"] = cfg.solver.warm_start;
    j["solver"] = s;
    j["seeds"] = cfg.seeds;
    j["noise"]["mechanism"] = noise_mechanism_name(cfg.noise.mechanism);
    j["noise"]["scale"] = cfg.noise.scale;
    j["threads"] = cfg.threads;
    j["record_trace"] = cfg.record_trace;
    j["save_maps"] = cfg.save_maps;
    j["output_dir"] = cfg.output_dir;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (!j.contains("data")) throw ConfigError("config: missing 'data' section");
    const auto& data = j.at("data");
    if (data.contains("synth")) cfg.synth = spec_from_json(data.at("synth"));
    if (data.contains("manifest")) cfg.manifest = data.at("manifest").get<std::string>();
    if (!cfg.synth && !cfg.manifest)
        throw ConfigError("config: 'data' needs either 'synth' or 'manifest'");
    if (cfg.synth && cfg.manifest)
        throw ConfigError("config: 'data' cannot have both 'synth' and 'manifest'");
    cfg.method = parse_method(j.value("method", "closed"));
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        cfg.solver.c = s.value("c", cfg.solver.c);
        cfg.solver.lambda = s.value("lambda", cfg.solver.lambda);
        cfg.solver.epsilon = s.value("epsilon", cfg.solver.epsilon);
        cfg.solver.eta = s.value("eta", cfg.solver.eta);
        cfg.solver.alpha = s.value("alpha", cfg.solver.alpha);
        cfg.solver.max_iters = s.value("max_iters", cfg.solver.max_iters);
        if (s.contains("stop_tol")) cfg.solver.stop_tol = s.at("stop_tol").get<double>();
        cfg.solver.warm_start = s.value("warm_start", cfg.solver.warm_start);
    }
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) throw ConfigError("config: seeds must be nonempty");
    if (j.contains("noise")) {
        cfg.noise.mechanism = parse_noise_mechanism(j.at("noise").value("mechanism", "none"));
        cfg.noise.scale = j.at("noise").value("scale", 0.0);
    }
    cfg.threads = j.value("threads", 1);
    cfg.record_trace = j.value("record_trace", false);
    cfg.save_maps = j.value("save_maps", false);
    cfg.output_dir = j.value("output_dir", std::string());
    return cfg;
}

// ---- pipeline ------------------------------------------------------------

namespace detail {

/// Independent noise stream per (run seed, node, train/test split).
inline std::uint64_t noise_seed(std::uint64_t seed, int node, int split) {
    return rng::splitmix64(rng::splitmix64(seed) ^
                           (0xA11CEULL + 2 * static_cast<std::uint64_t>(node) +
                            static_cast<std::uint64_t>(split)));
}

struct SolveOutput {
    AlignmentMap w;
    std::vector<PdmmTraceRow> pdmm_trace;
    std::vector<TvTraceRow> tv_trace;
};

} // namespace detail

struct SeedRunResult {
    SeedRow row;
    detail::SolveOutput solve;
    StageTimings timing;
};

inline SeedRunResult run_seed(const ExperimentConfig& cfg, const LanguageGraph& graph,
                              const SynthInstance& base_instance, std::uint64_t seed,
                              bool instance_is_fixed) {
    using clock = std::chrono::steady_clock;
    SeedRunResult out;
    out.row.seed = seed;

    auto t0 = clock::now();
    SynthInstance local;
    const SynthInstance* inst = &base_instance;
    if (!instance_is_fixed) {
        SynthSpec spec = cfg.synth_spec();
        spec.seed = seed;
        local = generate(spec);
        inst = &local;
    }

    std::vector<NodeData> train = inst->train;
    std::vector<NodeData> test = inst->test;
    if (cfg.noise.mechanism != NoiseMechanism::none && cfg.noise.scale > 0.0) {
        for (std::size_t i = 0; i < train.size(); ++i) {
            train[i].ev = inject_noise(train[i].ev, cfg.noise.mechanism, cfg.noise.scale,
                                       detail::noise_seed(seed, train[i].node, 0));
            test[i].ev = inject_noise(test[i].ev, cfg.noise.mechanism, cfg.noise.scale,
                                      detail::noise_seed(seed, test[i].node, 1));
        }
    }
    auto t1 = clock::now();

    switch (cfg.method) {
        case Method::closed: {
            out.solve.w.reserve(train.size());
            for (const auto& d : train) out.solve.w.push_back(ridge_align(d, cfg.solver.lambda));
            break;
        }
        case Method::pdmm: {
            PdmmConfig pc;
            pc.c = cfg.solver.c;
            pc.lambda = cfg.solver.lambda;
            pc.epsilon = cfg.solver.epsilon;
            pc.max_iters = cfg.solver.max_iters;
            pc.stop_tol = cfg.solver.stop_tol;
            pc.record_trace = cfg.record_trace;
            auto res = pdmm_solve(graph, train, pc);
            out.solve.w = std::move(res.w);
            out.solve.pdmm_trace = std::move(res.trace);
            break;
        }
        case Method::tv: {
            TvConfig tc;
            tc.lambda = cfg.solver.lambda;
            tc.eta = cfg.solver.eta;
            tc.alpha = cfg.solver.alpha;
            tc.max_iters = cfg.solver.max_iters;
            tc.record_trace = cfg.record_trace;
            tc.warm_start = cfg.solver.warm_start;
            auto res = tv_solve(graph, train, tc);
            out.solve.w = std::move(res.w);
            out.solve.tv_trace = std::move(res.trace);
            break;
        }
    }
    auto t2 = clock::now();

    EvalResult& ev = out.row.eval;
    double cos_sum = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto stats = mean_cosine(apply_alignment(test[i].ev, out.solve.w[i]), test[i].ea);
        ev.per_node_cosine.push_back(stats.mean);
        ev.degenerate_rows += stats.degenerate_rows;
        cos_sum += stats.mean;
    }
    ev.mean_cosine = cos_sum / static_cast<double>(test.size());
    ev.test_rel_error = holdout_error(test, out.solve.w);
    ev.objective = cfg.method == Method::tv
                       ? tv_objective(graph, train, out.solve.w, cfg.solver.lambda,
                                      cfg.solver.eta)
                       : ridge_objective(train, out.solve.w, cfg.solver.lambda);
    ev.max_violation = max_violation(graph, out.solve.w);
    auto t3 = clock::now();

    const auto secs = [](auto a, auto b) {
        return std::chrono::duration<double>(b - a).count();
    };
    out.timing.instance_s = secs(t0, t1);
    out.timing.solve_s = secs(t1, t2);
    out.timing.eval_s = secs(t2, t3);
    return out;
}

namespace detail {

inline Aggregate aggregate_of(const std::vector<double>& xs) {
    Aggregate a;
    if (xs.empty()) return a;
    double sum = 0.0;
    for (double x : xs) sum += x;
    a.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - a.mean) * (x - a.mean);
        a.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return a;
}

inline double vector_mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

} // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    using clock = std::chrono::steady_clock;
    const auto wall0 = clock::now();
    if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");

    SynthInstance fixed_instance;
    SynthSpec manifest_spec;
    bool instance_is_fixed = false;
    if (cfg.manifest) {
        auto [spec, inst] = import_instance(*cfg.manifest);
        manifest_spec = std::move(spec);
        fixed_instance = std::move(inst);
        instance_is_fixed = true;
    }
    const LanguageGraph graph = cfg.synth ? cfg.synth->graph : manifest_spec.graph;

    std::vector<SeedRunResult> results(cfg.seeds.size());
    std::vector<std::string> failures(cfg.seeds.size());
    detail::parallel_for(cfg.seeds.size(), cfg.threads, [&](std::size_t k) {
        try {
            results[k] = run_seed(cfg, graph, fixed_instance, cfg.seeds[k], instance_is_fixed);
        } catch (const std::exception& e) {
            failures[k] = e.what();
        }
    });
    for (std::size_t k = 0; k < cfg.seeds.size(); ++k)
        if (!failures[k].empty())
            throw SolverError("seed " + std::to_string(cfg.seeds[k]) + ": " + failures[k]);

    ExperimentReport report;
    report.config_echo = config_to_json(cfg);
    std::vector<double> cosines, rel_errors, objectives, violations;
    for (auto& r : results) {
        report.rows.push_back(r.row);
        cosines.push_back(r.row.eval.mean_cosine);
        rel_errors.push_back(detail::vector_mean(r.row.eval.test_rel_error));
        objectives.push_back(r.row.eval.objective);
        violations.push_back(r.row.eval.max_violation);
        report.timing.instance_s += r.timing.instance_s;
        report.timing.solve_s += r.timing.solve_s;
        report.timing.eval_s += r.timing.eval_s;
    }
    report.mean_cosine = detail::aggregate_of(cosines);
    report.mean_rel_error = detail::aggregate_of(rel_errors);
    report.objective = detail::aggregate_of(objectives);
    report.max_violation_agg = detail::aggregate_of(violations);
    report.timing.wall_total_s = std::chrono::duration<double>(clock::now() - wall0).count();

    // artifacts under output_dir (maps, traces) if requested
    if (!cfg.output_dir.empty() && (cfg.save_maps || cfg.record_trace)) {
        const std::filesystem::path dir(cfg.output_dir);
        for (std::size_t k = 0; k < results.size(); ++k) {
            const auto seed_tag = "seed" + std::to_string(cfg.seeds[k]);
            if (cfg.save_maps) {
                const auto mdir = dir / "maps" / seed_tag;
                std::filesystem::create_directories(mdir);
                for (std::size_t i = 0; i < results[k].solve.w.size(); ++i)
                    write_matrix_binary_file(
                        (mdir / ("w_node" + std::to_string(i) + ".bin")).string(),
                        results[k].solve.w[i], MatrixKind::alignment_map);
            }
            if (cfg.record_trace) {
                std::filesystem::create_directories(dir);
                std::ofstream tf(dir / ("trace_" + seed_tag + ".csv"));
                if (cfg.method == Method::pdmm)
                    write_pdmm_trace_csv(tf, results[k].solve.pdmm_trace);
                else if (cfg.method == Method::tv)
                    write_tv_trace_csv(tf, results[k].solve.tv_trace);
            }
        }
    }
    return report;
}

// ---- report serialization -------------------------------------------------

inline nlohmann::json aggregate_to_json(const Aggregate& a) {
    return nlohmann::json{{"mean", a.mean}, {"std", a.stddev}};
}

/// Deterministic report body; excludes wall-clock so identical configs give
/// byte-identical files regardless of machine load or thread count.
inline nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json j;
    j["config"] = report.config_echo;
    auto rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json row;
        row["seed"] = r.seed;
        row["eval"] = eval_to_json(r.eval);
        rows.push_back(std::move(row));
    }
    j["rows"] = rows;
    j["aggregate"]["mean_cosine"] = aggregate_to_json(report.mean_cosine);
    j["aggregate"]["mean_rel_error"] = aggregate_to_json(report.mean_rel_error);
    j["aggregate"]["objective"] = aggregate_to_json(report.objective);
    j["aggregate"]["max_violation"] = aggregate_to_json(report.max_violation_agg);
    return j;
}

inline nlohmann::json timing_to_json(const StageTimings& t) {
    return nlohmann::json{{"instance_s", t.instance_s},
                          {"solve_s", t.solve_s},
                          {"eval_s", t.eval_s},
                          {"wall_total_s", t.wall_total_s}};
}

/// CSV rows: `seed,mean_cosine,mean_rel_error,objective,max_violation,degenerate_rows`.
inline std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "seed,mean_cosine,mean_rel_error,objective,max_violation,degenerate_rows\n";
    for (const auto& r : report.rows) {
        out << r.seed << ',' << r.eval.mean_cosine << ','
            << detail::vector_mean(r.eval.test_rel_error) << ',' << r.eval.objective << ','
            << r.eval.max_violation << ',' << r.eval.degenerate_rows << '\n';
    }
    return out.str();
}

/// Write report.json, report.csv and timing.json under the config's output
/// directory.
inline void write_report(const ExperimentReport& report, const std::string& output_dir) {
    const std::filesystem::path dir(output_dir);
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw DataError("cannot write report.json under '" + output_dir + "'");
        out << report_to_json(report).dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "report.csv");
        out << report_to_csv(report);
    }
    {
        std::ofstream out(dir / "timing.json");
        out << timing_to_json(report.timing).dump(2) << '\n';
    }
}

// ---- sweeps ----------------------------------------------------------------

struct SweepRow {
    std::string param;
    double value = 0.0;
    SeedRow seed_row;
};

struct SweepReport {
    nlohmann::json config_echo;
    std::string param;
    std::vector<double> values;
    std::vector<SweepRow> rows;
    std::vector<std::pair<double, Aggregate>> cosine_by_value;
};

inline void apply_sweep_value(ExperimentConfig& cfg, const std::string& param, double value) {
    if (param == "epsilon") {
        cfg.solver.epsilon = value;
    } else if (param == "eta") {
        cfg.solver.eta = value;
    } else if (param == "lambda") {
        cfg.solver.lambda = value;
    } else if (param == "alpha") {
        cfg.solver.alpha = value;
    } else if (param == "c") {
        cfg.solver.c = value;
    } else if (param == "b_train") {
        if (!cfg.synth) throw ConfigError("sweep over b_train requires a synth data source");
        cfg.synth->b_train = static_cast<int>(value);
    } else {
        throw ConfigError("unknown sweep parameter '" + param +
                          "' (epsilon|eta|lambda|alpha|c|b_train)");
    }
}

inline SweepReport run_sweep(const ExperimentConfig& base, const std::string& param,
                             const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep: values must be nonempty");
    SweepReport sweep;
    sweep.config_echo = config_to_json(base);
    sweep.param = param;
    sweep.values = values;
    for (double v : values) {
        ExperimentConfig cfg = base;
        apply_sweep_value(cfg, param, v);
        cfg.save_maps = false;
        cfg.record_trace = false;
        cfg.output_dir.clear();
        const auto report = run_experiment(cfg);
        for (const auto& row : report.rows) sweep.rows.push_back({param, v, row});
        sweep.cosine_by_value.emplace_back(v, report.mean_cosine);
    }
    return sweep;
}

inline nlohmann::json sweep_to_json(const SweepReport& sweep) {
    nlohmann::json j;
    j["config"] = sweep.config_echo;
    j["param"] = sweep.param;
    j["values"] = sweep.values;
    auto rows = nlohmann::json::array();
    for (const auto& r : sweep.rows) {
        nlohmann::json row;
        row["param"] = r.param;
        row["value"] = r.value;
        row["seed"] = r.seed_row.seed;
        row["eval"] = eval_to_json(r.seed_row.eval);
        rows.push_back(std::move(row));
    }
    j["rows"] = rows;
    auto agg = nlohmann::json::array();
    for (const auto& [v, a] : sweep.cosine_by_value)
        agg.push_back({{"value", v}, {"mean_cosine", aggregate_to_json(a)}});
    j["aggregate"] = agg;
    return j;
}

/// CSV rows: `param,value,seed,mean_cosine,mean_rel_error,objective,max_violation,degenerate_rows`.
inline std::string sweep_to_csv(const SweepReport& sweep) {
    std::ostringstream out;
    out.precision(17);
    out << "param,value,seed,mean_cosine,mean_rel_error,objective,max_violation,degenerate_rows\n";
    for (const auto& r : sweep.rows) {
        out << r.param << ',' << r.value << ',' << r.seed_row.seed << ','
            << r.seed_row.eval.mean_cosine << ','
            << detail::vector_mean(r.seed_row.eval.test_rel_error) << ','
            << r.seed_row.eval.objective << ',' << r.seed_row.eval.max_violation << ','
            << r.seed_row.eval.degenerate_rows << '\n';
    }
    return out.str();
}

inline void write_sweep(const SweepReport& sweep, const std::string& output_dir) {
    const std::filesystem::path dir(output_dir);
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw DataError("cannot write report.json under '" + output_dir + "'");
        out << sweep_to_json(sweep).dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "report.csv");
        out << sweep_to_csv(sweep);
    }
}

} // namespace lago
