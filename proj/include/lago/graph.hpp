#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/distance.hpp"
#include "lago/types.hpp"

namespace lago {

/// Undirected language similarity graph. Edges are stored as (i, j) with
/// i < j, sorted; no self-loops.
struct LanguageGraph {
    std::vector<std::string> labels;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> degrees;

    int size() const { return static_cast<int>(labels.size()); }

    std::vector<std::vector<int>> neighbors() const {
        std::vector<std::vector<int>> adj(labels.size());
        for (const auto& [i, j] : edges) {
            adj[static_cast<std::size_t>(i)].push_back(j);
            adj[static_cast<std::size_t>(j)].push_back(i);
        }
        for (auto& a : adj) std::sort(a.begin(), a.end());
        return adj;
    }
};

namespace detail {
inline std::vector<int> count_degrees(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> deg(static_cast<std::size_t>(n), 0);
    for (const auto& [i, j] : edges) {
        ++deg[static_cast<std::size_t>(i)];
        ++deg[static_cast<std::size_t>(j)];
    }
    return deg;
}
} // namespace detail

/// Threshold the distance matrix: edge (i, j) iff i != j and D_ij < r.
///
/// Strict inequality: a pair at exactly distance r stays disconnected, which
/// fixes sign(0) = +1 in the adjacency view A = (1 - sign(D - r)) / 2.
inline LanguageGraph build_graph(const DistanceMatrix& d, double r) {
    if (!std::isfinite(r)) throw ConfigError("graph threshold r must be finite");
    LanguageGraph g;
    g.labels = d.labels;
    const auto n = static_cast<int>(d.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (d.values(i, j) < r) g.edges.emplace_back(i, j);
    g.degrees = detail::count_degrees(n, g.edges);
    return g;
}

/// Build a graph from an explicit edge list (test and synthetic topologies).
inline LanguageGraph make_graph(std::vector<std::string> labels,
                                std::vector<std::pair<int, int>> edges) {
    LanguageGraph g;
    g.labels = std::move(labels);
    const int n = g.size();
    for (auto& [i, j] : edges) {
        if (i == j) throw DataError("self-loop at node " + std::to_string(i));
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw DataError("edge endpoint out of range");
        if (i > j) std::swap(i, j);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    g.degrees = detail::count_degrees(n, g.edges);
    return g;
}

inline std::vector<std::string> default_labels(int n) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels.push_back("n" + std::to_string(i));
    return labels;
}

inline LanguageGraph make_complete_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return make_graph(default_labels(n), std::move(edges));
}

inline LanguageGraph make_path_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return make_graph(default_labels(n), std::move(edges));
}

inline LanguageGraph make_empty_graph(int n) {
    return make_graph(default_labels(n), {});
}

/// Partition node indices into connected components (BFS order within each
/// component, components ordered by smallest member).
inline std::vector<std::vector<int>> connected_components(const LanguageGraph& g) {
    const auto adj = g.neighbors();
    const int n = g.size();
    std::vector<bool> visited(static_cast<std::size_t>(n), false);
    std::vector<std::vector<int>> components;
    for (int s = 0; s < n; ++s) {
        if (visited[static_cast<std::size_t>(s)]) continue;
        std::vector<int> comp;
        std::vector<int> queue{s};
        visited[static_cast<std::size_t>(s)] = true;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.erase(queue.begin());
            comp.push_back(u);
            for (int v : adj[static_cast<std::size_t>(u)]) {
                if (!visited[static_cast<std::size_t>(v)]) {
                    visited[static_cast<std::size_t>(v)] = true;
                    queue.push_back(v);
                }
            }
        }
        components.push_back(std::move(comp));
    }
    return components;
}

/// Hop distances from a source node; -1 marks unreachable nodes.
inline std::vector<int> hop_distances(const LanguageGraph& g, int source) {
    const auto adj = g.neighbors();
    std::vector<int> dist(static_cast<std::size_t>(g.size()), -1);
    dist[static_cast<std::size_t>(source)] = 0;
    std::vector<int> queue{source};
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int u = queue[head];
        for (int v : adj[static_cast<std::size_t>(u)]) {
            if (dist[static_cast<std::size_t>(v)] < 0) {
                dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

/// 0/1 adjacency view of the edge set.
inline Matrix adjacency_matrix(const LanguageGraph& g) {
    Matrix a = Matrix::Zero(g.size(), g.size());
    for (const auto& [i, j] : g.edges) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    return a;
}

inline nlohmann::json graph_to_json(const LanguageGraph& g) {
    nlohmann::json j;
    j["labels"] = g.labels;
    auto edges = nlohmann::json::array();
    for (const auto& [a, b] : g.edges) edges.push_back({a, b});
    j["edges"] = edges;
    return j;
}

inline LanguageGraph graph_from_json(const nlohmann::json& j) {
    std::vector<std::string> labels = j.at("labels").get<std::vector<std::string>>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges"))
        edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    return make_graph(std::move(labels), std::move(edges));
}

} // namespace lago
