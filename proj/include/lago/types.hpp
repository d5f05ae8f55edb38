#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lago/errors.hpp"

namespace lago {

using Matrix = Eigen::MatrixXd;

/// Paired embedding matrices of one language node: victim rows E_V (b x m)
/// and attack rows E_A (b x n), one sample per row.
struct NodeData {
    int node = 0;
    Matrix ev;
    Matrix ea;

    Eigen::Index samples() const { return ev.rows(); }
    Eigen::Index victim_dim() const { return ev.cols(); }
    Eigen::Index attack_dim() const { return ea.cols(); }
};

/// Per-node linear alignment maps W_i, all of a common m x n shape.
using AlignmentMap = std::vector<Matrix>;

inline void check_node_data(const NodeData& d) {
    if (d.ev.rows() != d.ea.rows())
        throw DimensionError("node " + std::to_string(d.node) + ": E_V has " +
                             std::to_string(d.ev.rows()) + " rows but E_A has " +
                             std::to_string(d.ea.rows()));
    if (d.ev.rows() < 1)
        throw DimensionError("node " + std::to_string(d.node) + ": no samples");
    if (!d.ev.allFinite() || !d.ea.allFinite())
        throw DataError("node " + std::to_string(d.node) + ": non-finite embedding entries");
}

/// Validate that all nodes share victim/attack dimensions and finite data.
inline void check_node_set(const std::vector<NodeData>& data) {
    if (data.empty()) throw DimensionError("empty node set");
    for (const auto& d : data) check_node_data(d);
    for (const auto& d : data) {
        if (d.victim_dim() != data.front().victim_dim() ||
            d.attack_dim() != data.front().attack_dim())
            throw DimensionError("embedding dimensions differ across nodes");
    }
}

inline void check_alignment_map(const AlignmentMap& w) {
    if (w.empty()) throw DimensionError("empty alignment map");
    for (const auto& wi : w) {
        if (wi.rows() != w.front().rows() || wi.cols() != w.front().cols())
            throw DimensionError("alignment maps differ in shape across nodes");
        if (!wi.allFinite()) throw DataError("non-finite alignment map entries");
    }
}

} // namespace lago
