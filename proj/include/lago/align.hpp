#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lago/types.hpp"

// Closed-form per-node alignment: W minimizes
//
//     1/2 ||E_A - E_V W||_F^2 + lambda/2 ||W||_F^2,
//
// i.e. the solution of (E_V^T E_V + lambda I) W = E_V^T E_A. The system is
// solved through a symmetric factorization plus one step of iterative
// refinement rather than an explicit inverse.

namespace lago {

namespace detail {

/// Solve G X = B for symmetric positive (semi)definite G with one step of
/// iterative refinement. Shared by ridge_align and the PDMM node solver so
/// the two coincide bit-for-bit on isolated nodes.
struct SpdSolver {
    Matrix g;
    Eigen::LDLT<Matrix> fact;

    explicit SpdSolver(Matrix system) : g(std::move(system)), fact(g) {}

    Matrix solve(const Matrix& b) const {
        Matrix x = fact.solve(b);
        x += fact.solve(b - g * x);
        return x;
    }
};

} // namespace detail

/// Gradient of the local ridge objective at W:
/// -E_V^T (E_A - E_V W) + lambda W.
inline Matrix alignment_gradient(const NodeData& d, const Matrix& w, double lambda) {
    check_node_data(d);
    if (w.rows() != d.victim_dim() || w.cols() != d.attack_dim())
        throw DimensionError("alignment map shape does not match node data");
    return -(d.ev.transpose() * (d.ea - d.ev * w)) + lambda * w;
}

/// Closed-form ridge alignment (the per-node baseline).
///
/// Throws RankDeficiencyError when lambda = 0 and E_V^T E_V is singular; any
/// lambda > 0 makes the system positive definite and the call always succeeds.
inline Matrix ridge_align(const NodeData& d, double lambda) {
    check_node_data(d);
    if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");

    Matrix gram = d.ev.transpose() * d.ev;
    gram.diagonal().array() += lambda;
    const Matrix rhs = d.ev.transpose() * d.ea;

    const detail::SpdSolver solver(std::move(gram));
    Matrix w = solver.solve(rhs);

    // Optimality certificate: first-order residual relative to the data scale.
    const double residual = (d.ev.transpose() * (d.ev * w - d.ea) + lambda * w).norm();
    const double tol = 1e-8 * (1.0 + rhs.norm());
    if (!w.allFinite() || residual > tol) {
        if (lambda == 0.0)
            throw RankDeficiencyError(
                "E_V^T E_V is rank deficient at lambda = 0 (b < m or collinear "
                "samples); set lambda > 0");
        throw SolverError("ridge system solve failed the optimality certificate (residual " +
                          std::to_string(residual) + ")");
    }
    return w;
}

/// Aligned embeddings E_V W.
inline Matrix apply_alignment(const Matrix& ev, const Matrix& w) {
    if (ev.cols() != w.rows())
        throw DimensionError("apply_alignment: E_V has " + std::to_string(ev.cols()) +
                             " columns but W has " + std::to_string(w.rows()) + " rows");
    return ev * w;
}

/// Single transform fit on all nodes' stacked data:
/// (sum_i E_V,i^T E_V,i + N lambda I)^{-1} sum_i E_V,i^T E_A,i.
/// This is the epsilon = 0 consensus limit on a connected graph.
inline Matrix pooled_ridge(const std::vector<NodeData>& data, double lambda) {
    check_node_set(data);
    const Eigen::Index m = data.front().victim_dim();
    Matrix gram = Matrix::Zero(m, m);
    Matrix rhs = Matrix::Zero(m, data.front().attack_dim());
    for (const auto& d : data) {
        gram += d.ev.transpose() * d.ev;
        rhs += d.ev.transpose() * d.ea;
    }
    gram.diagonal().array() += static_cast<double>(data.size()) * lambda;
    const detail::SpdSolver solver(std::move(gram));
    Matrix w = solver.solve(rhs);
    if (!w.allFinite())
        throw RankDeficiencyError("pooled ridge system is singular; set lambda > 0");
    return w;
}

/// Sum of local ridge objectives at the given maps (the Variant 1 objective
/// without its constraints).
inline double ridge_objective(const std::vector<NodeData>& data, const AlignmentMap& w,
                              double lambda) {
    if (data.size() != w.size())
        throw DimensionError("node count does not match alignment map count");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        total += 0.5 * (data[i].ea - data[i].ev * w[i]).squaredNorm() +
                 0.5 * lambda * w[i].squaredNorm();
    }
    return total;
}

/// Optional preprocessing: scale each row to unit l2 norm (zero rows kept).
inline Matrix normalize_rows(const Matrix& e) {
    Matrix out = e;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double norm = out.row(r).norm();
        if (norm > 0.0) out.row(r) /= norm;
    }
    return out;
}

} // namespace lago
