#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/types.hpp"

namespace lago {

struct CosineStats {
    double mean = 0.0;
    int degenerate_rows = 0;  // rows where either vector had norm < 1e-12
};

/// Mean over rows of cos(x, y). Degenerate rows (either side with norm below
/// 1e-12) contribute 0 to the mean and are counted, not rejected, so noised
/// or zeroed embeddings still evaluate.
inline CosineStats mean_cosine(const Matrix& e_hat, const Matrix& e_ref) {
    if (e_hat.rows() != e_ref.rows() || e_hat.cols() != e_ref.cols())
        throw DimensionError("mean_cosine: shapes differ");
    if (e_hat.rows() < 1) throw DimensionError("mean_cosine: no rows");
    constexpr double kNormFloor = 1e-12;
    CosineStats stats;
    double sum = 0.0;
    for (Eigen::Index r = 0; r < e_hat.rows(); ++r) {
        const double na = e_hat.row(r).norm();
        const double nb = e_ref.row(r).norm();
        if (na < kNormFloor || nb < kNormFloor) {
            ++stats.degenerate_rows;
            continue;
        }
        sum += e_hat.row(r).dot(e_ref.row(r)) / (na * nb);
    }
    stats.mean = sum / static_cast<double>(e_hat.rows());
    return stats;
}

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline std::vector<std::string> whitespace_tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) tokens.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return tokens;
}

inline std::size_t lcs_length(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
    // rolling-row DP
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// Rouge-L from the longest common subsequence of the token sequences.
/// Both empty -> (1,1,1); exactly one empty -> (0,0,0).
inline RougeScore rouge_l(const std::vector<std::string>& candidate,
                          const std::vector<std::string>& reference) {
    if (candidate.empty() && reference.empty()) return {1.0, 1.0, 1.0};
    if (candidate.empty() || reference.empty()) return {0.0, 0.0, 0.0};
    const auto l = static_cast<double>(lcs_length(candidate, reference));
    RougeScore s;
    s.precision = l / static_cast<double>(candidate.size());
    s.recall = l / static_cast<double>(reference.size());
    s.f1 = s.precision + s.recall > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

/// Per-node relative reconstruction error on held-out data:
/// ||E_V W - E_A||_F / max(||E_A||_F, 1e-12).
inline std::vector<double> holdout_error(const std::vector<NodeData>& eval_data,
                                         const AlignmentMap& w) {
    if (eval_data.size() != w.size())
        throw DimensionError("holdout_error: node count does not match map count");
    std::vector<double> errors;
    errors.reserve(eval_data.size());
    for (std::size_t i = 0; i < eval_data.size(); ++i) {
        if (eval_data[i].ev.cols() != w[i].rows() || eval_data[i].ea.cols() != w[i].cols())
            throw DimensionError("holdout_error: shape mismatch at node " + std::to_string(i));
        const double num = (eval_data[i].ev * w[i] - eval_data[i].ea).norm();
        const double den = std::max(eval_data[i].ea.norm(), 1e-12);
        errors.push_back(num / den);
    }
    return errors;
}

/// Per-run evaluation summary.
struct EvalResult {
    double mean_cosine = 0.0;  // mean of per-node mean cosines
    std::vector<double> per_node_cosine;
    std::vector<double> test_rel_error;
    double objective = 0.0;
    double max_violation = 0.0;
    int degenerate_rows = 0;
};

inline nlohmann::json eval_to_json(const EvalResult& r) {
    nlohmann::json j;
    j["mean_cosine"] = r.mean_cosine;
    j["per_node_cosine"] = r.per_node_cosine;
    j["test_rel_error"] = r.test_rel_error;
    j["objective"] = r.objective;
    j["max_violation"] = r.max_violation;
    j["degenerate_rows"] = r.degenerate_rows;
    return j;
}

} // namespace lago
