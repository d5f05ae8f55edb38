#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/graph.hpp"
#include "lago/io.hpp"
#include "lago/rng.hpp"
#include "lago/types.hpp"

// Deterministic synthetic multilingual instances. A shared base transform W0
// models the cross-lingual structure; each node's ground truth deviates by
// delta-scaled noise, so small delta emulates closely related languages.
// All values come from the counter-based RNG keyed by (seed, stream, node,
// position): the same spec yields bit-identical instances regardless of
// generation order or thread count.

namespace lago {

struct SynthSpec {
    int n_nodes = 1;
    LanguageGraph graph;
    int m = 1;
    int n = 1;
    int b_train = 1;
    int b_test = 1;
    double delta = 0.0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    // "shared": every node deviates from W0 by delta. "distance_weighted":
    // node i's deviation scales with its hop distance from node 0, for
    // studying how transfer decays with topological distance.
    enum class Deviation { shared, distance_weighted };
    Deviation deviation = Deviation::shared;
};

struct SynthInstance {
    std::vector<NodeData> train;
    std::vector<NodeData> test;
    AlignmentMap truth;
};

namespace detail {

inline Matrix normal_matrix(const rng::Key& key, Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = rng::normal(key, static_cast<std::uint64_t>(r * cols + c));
    return m;
}

} // namespace detail

inline void validate_spec(const SynthSpec& spec) {
    if (spec.n_nodes < 1 || spec.m < 1 || spec.n < 1 || spec.b_train < 1 || spec.b_test < 1)
        throw ConfigError("synth: all dimensions must be >= 1");
    if (spec.delta < 0.0 || spec.sigma < 0.0)
        throw ConfigError("synth: delta and sigma must be >= 0");
    if (spec.graph.size() != spec.n_nodes)
        throw ConfigError("synth: graph has " + std::to_string(spec.graph.size()) +
                          " nodes, spec says " + std::to_string(spec.n_nodes));
}

inline SynthInstance generate(const SynthSpec& spec) {
    validate_spec(spec);
    const auto m = static_cast<Eigen::Index>(spec.m);
    const auto n = static_cast<Eigen::Index>(spec.n);

    const Matrix w0 =
        detail::normal_matrix({spec.seed, rng::Stream::base_transform, 0}, m, n);

    std::vector<double> scale(static_cast<std::size_t>(spec.n_nodes), spec.delta);
    if (spec.deviation == SynthSpec::Deviation::distance_weighted) {
        const auto hops = hop_distances(spec.graph, 0);
        int max_hop = 0;
        for (int h : hops)
            if (h > max_hop) max_hop = h;
        for (std::size_t i = 0; i < scale.size(); ++i) {
            const int h = hops[i] >= 0 ? hops[i] : max_hop + 1;
            scale[i] = spec.delta * static_cast<double>(h);
        }
    }

    SynthInstance inst;
    inst.truth.reserve(static_cast<std::size_t>(spec.n_nodes));
    for (int i = 0; i < spec.n_nodes; ++i) {
        const auto node = static_cast<std::uint32_t>(i);
        Matrix wi = w0;
        if (scale[static_cast<std::size_t>(i)] > 0.0)
            wi += scale[static_cast<std::size_t>(i)] *
                  detail::normal_matrix({spec.seed, rng::Stream::node_deviation, node}, m, n);
        inst.truth.push_back(wi);

        const auto make_split = [&](rng::Stream ev_stream, rng::Stream noise_stream,
                                    int rows) {
            NodeData d;
            d.node = i;
            d.ev = detail::normal_matrix({spec.seed, ev_stream, node},
                                         static_cast<Eigen::Index>(rows), m);
            d.ea = d.ev * wi;
            if (spec.sigma > 0.0)
                d.ea += spec.sigma *
                        detail::normal_matrix({spec.seed, noise_stream, node},
                                              static_cast<Eigen::Index>(rows), n);
            return d;
        };
        inst.train.push_back(
            make_split(rng::Stream::train_victim, rng::Stream::train_noise, spec.b_train));
        inst.test.push_back(
            make_split(rng::Stream::test_victim, rng::Stream::test_noise, spec.b_test));
    }
    return inst;
}

inline nlohmann::json spec_to_json(const SynthSpec& spec) {
    nlohmann::json j;
    j["n_nodes"] = spec.n_nodes;
    j["m"] = spec.m;
    j["n"] = spec.n;
    j["b_train"] = spec.b_train;
    j["b_test"] = spec.b_test;
    j["delta"] = spec.delta;
    j["sigma"] = spec.sigma;
    j["seed"] = spec.seed;
    j["deviation"] =
        spec.deviation == SynthSpec::Deviation::shared ? "shared" : "distance_weighted";
    j["graph"] = graph_to_json(spec.graph);
    return j;
}

inline SynthSpec spec_from_json(const nlohmann::json& j) {
    SynthSpec spec;
    spec.n_nodes = j.at("n_nodes").get<int>();
    spec.m = j.at("m").get<int>();
    spec.n = j.at("n").get<int>();
    spec.b_train = j.at("b_train").get<int>();
    spec.b_test = j.at("b_test").get<int>();
    spec.delta = j.at("delta").get<double>();
    spec.sigma = j.at("sigma").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.graph = graph_from_json(j.at("graph"));
    const std::string dev = j.value("deviation", "shared");
    if (dev == "shared") {
        spec.deviation = SynthSpec::Deviation::shared;
    } else if (dev == "distance_weighted") {
        spec.deviation = SynthSpec::Deviation::distance_weighted;
    } else {
        throw ConfigError("synth: unknown deviation mode '" + dev + "'");
    }
    return spec;
}

/// Write the instance's embeddings and ground truth under `dir` and return
/// the manifest (also written as manifest.json).
inline nlohmann::json export_instance(const SynthSpec& spec, const SynthInstance& inst,
                                      const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["spec"] = spec_to_json(spec);
    manifest["seed"] = spec.seed;
    manifest["graph"] = graph_to_json(spec.graph);
    auto nodes = nlohmann::json::array();
    for (int i = 0; i < spec.n_nodes; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const std::string base = "node" + std::to_string(i);
        nlohmann::json entry;
        entry["node"] = i;
        entry["label"] = spec.graph.labels[iu];
        entry["train_ev"] = base + "_train_ev.bin";
        entry["train_ea"] = base + "_train_ea.bin";
        entry["test_ev"] = base + "_test_ev.bin";
        entry["test_ea"] = base + "_test_ea.bin";
        entry["truth"] = base + "_truth.bin";
        write_matrix_binary_file((dir / (base + "_train_ev.bin")).string(), inst.train[iu].ev,
                                 MatrixKind::embedding);
        write_matrix_binary_file((dir / (base + "_train_ea.bin")).string(), inst.train[iu].ea,
                                 MatrixKind::embedding);
        write_matrix_binary_file((dir / (base + "_test_ev.bin")).string(), inst.test[iu].ev,
                                 MatrixKind::embedding);
        write_matrix_binary_file((dir / (base + "_test_ea.bin")).string(), inst.test[iu].ea,
                                 MatrixKind::embedding);
        write_matrix_binary_file((dir / (base + "_truth.bin")).string(), inst.truth[iu],
                                 MatrixKind::alignment_map);
        nodes.push_back(std::move(entry));
    }
    manifest["nodes"] = nodes;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw DataError("cannot write manifest under '" + dir.string() + "'");
    out << manifest.dump(2) << '\n';
    return manifest;
}

/// Load an exported instance back from its manifest.
inline std::pair<SynthSpec, SynthInstance> import_instance(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest '" + manifest_path.string() + "'");
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest: " + std::string(e.what()));
    }
    const auto dir = manifest_path.parent_path();
    SynthSpec spec = spec_from_json(manifest.at("spec"));
    SynthInstance inst;
    for (const auto& entry : manifest.at("nodes")) {
        const int node = entry.at("node").get<int>();
        NodeData train, test;
        train.node = node;
        test.node = node;
        train.ev = read_matrix_binary_file((dir / entry.at("train_ev").get<std::string>()).string(),
                                           MatrixKind::embedding);
        train.ea = read_matrix_binary_file((dir / entry.at("train_ea").get<std::string>()).string(),
                                           MatrixKind::embedding);
        test.ev = read_matrix_binary_file((dir / entry.at("test_ev").get<std::string>()).string(),
                                          MatrixKind::embedding);
        test.ea = read_matrix_binary_file((dir / entry.at("test_ea").get<std::string>()).string(),
                                          MatrixKind::embedding);
        inst.train.push_back(std::move(train));
        inst.test.push_back(std::move(test));
        inst.truth.push_back(read_matrix_binary_file(
            (dir / entry.at("truth").get<std::string>()).string(), MatrixKind::alignment_map));
    }
    check_node_set(inst.train);
    check_node_set(inst.test);
    return {std::move(spec), std::move(inst)};
}

} // namespace lago
