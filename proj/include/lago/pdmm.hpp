#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include "lago/align.hpp"
#include "lago/graph.hpp"
#include "lago/types.hpp"

/*
 * Variant 1: inequality-constrained PDMM over the language graph.
 *
 * Minimize   sum_i 1/2 ||E_A,i - E_V,i W_i||_F^2 + lambda/2 ||W_i||_F^2
 * subject to ||W_i - W_j||_max <= epsilon  for every edge (i, j),
 *
 * written per edge as the two one-sided rows
 *
 *     W_i - W_j <= eps * 1     (node i's "+" row)
 *     W_j - W_i <= eps * 1     (node i's "-" row)
 *
 * so each node carries constraint blocks A_{i|j} = [+1; -1] from its own
 * perspective. Every directed edge (i|j) holds dual blocks Z+_{i|j}, Z-_{i|j}
 * of shape m x n, and one synchronous round computes
 *
 *   W_i  = [E_V,i^T E_V,i + (2 c d_i + lambda) I]^{-1}
 *          (E_V,i^T E_A,i - sum_{j in N_i} (Z+_{i|j} - Z-_{i|j}))
 *   Y+_{i|j} = Z+_{i|j} + 2c W_i - c eps,   Y-_{i|j} = Z-_{i|j} - 2c W_i - c eps
 *   Z-exchange, entry-wise per constraint row. Node i's "+" row is the same
 *   constraint as node j's "-" row, so the reflection pairs them crosswise:
 *     Z+_{i|j} <- Y-_{j|i}  where  Y+_{i|j} + Y-_{j|i} > 0,  else  -Y+_{i|j}
 *     Z-_{i|j} <- Y+_{j|i}  where  Y-_{i|j} + Y+_{j|i} > 0,  else  -Y-_{i|j}
 *   (the selector sum equals dual sum + 2c (W_i - W_j -+ eps), i.e. the
 *   violation of that row; ties take the "otherwise" branch).
 *
 * All Z start at zero. Per-node factorizations are iteration-independent and
 * computed once. Within a round, node updates read only previous-round state,
 * so parallel execution cannot change results.
 */

namespace lago {

struct PdmmConfig {
    double c = 0.4;
    double lambda = 0.01;
    double epsilon = 0.01;  // may be +infinity: exact per-node ridge shortcut
    int max_iters = 500;
    std::optional<double> stop_tol;  // early stop on max node-wise step, off by default
    bool record_trace = false;
    int threads = 1;
};

struct PdmmTraceRow {
    int iter = 0;
    double objective = 0.0;
    double max_violation = 0.0;
    double max_step = 0.0;
};

struct PdmmResult {
    AlignmentMap w;
    std::vector<PdmmTraceRow> trace;
    int iters_run = 0;
};

/// Largest entry-wise deviation across edges: max_(i,j) ||W_i - W_j||_max.
/// An edgeless graph yields 0.
inline double max_violation(const LanguageGraph& g, const AlignmentMap& w) {
    check_alignment_map(w);
    if (static_cast<int>(w.size()) != g.size())
        throw DimensionError("alignment map count does not match graph size");
    double worst = 0.0;
    for (const auto& [i, j] : g.edges) {
        const double v = (w[static_cast<std::size_t>(i)] - w[static_cast<std::size_t>(j)])
                             .cwiseAbs()
                             .maxCoeff();
        if (v > worst) worst = v;
    }
    return worst;
}

namespace detail {

template <typename Fn>
inline void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t k = t; k < count; k += workers) fn(k);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace detail

inline PdmmResult pdmm_solve(const LanguageGraph& g, const std::vector<NodeData>& data,
                             const PdmmConfig& cfg) {
    check_node_set(data);
    if (static_cast<int>(data.size()) != g.size())
        throw DimensionError("node data count does not match graph size");
    if (!(cfg.c > 0.0)) throw ConfigError("pdmm: c must be positive");
    if (std::isnan(cfg.epsilon) || cfg.epsilon < 0.0)
        throw ConfigError("pdmm: epsilon must be >= 0");
    if (cfg.max_iters < 1) throw ConfigError("pdmm: max_iters must be >= 1");

    const auto n_nodes = data.size();

    // epsilon = +inf removes every cross-node constraint: solve each node's
    // ridge system exactly, no iteration.
    if (std::isinf(cfg.epsilon)) {
        PdmmResult res;
        res.w.reserve(n_nodes);
        for (const auto& d : data) res.w.push_back(ridge_align(d, cfg.lambda));
        res.iters_run = 0;
        if (cfg.record_trace)
            res.trace.push_back({0, ridge_objective(data, res.w, cfg.lambda),
                                 max_violation(g, res.w), 0.0});
        return res;
    }

    const Eigen::Index m = data.front().victim_dim();
    const Eigen::Index n = data.front().attack_dim();
    const auto adj = g.neighbors();

    // Directed edge k has owner own[k] and reverse edge rev[k]; node i's
    // incident directed edges are mine[i].
    std::vector<int> own, rev;
    std::vector<std::vector<int>> mine(n_nodes);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const auto [i, j] = g.edges[e];
        own.push_back(i);
        own.push_back(j);
        rev.push_back(static_cast<int>(2 * e + 1));
        rev.push_back(static_cast<int>(2 * e));
        mine[static_cast<std::size_t>(i)].push_back(static_cast<int>(2 * e));
        mine[static_cast<std::size_t>(j)].push_back(static_cast<int>(2 * e + 1));
    }
    const std::size_t n_dir = own.size();

    std::vector<detail::SpdSolver> solvers;
    std::vector<Matrix> rhs0;
    solvers.reserve(n_nodes);
    rhs0.reserve(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        Matrix gram = data[i].ev.transpose() * data[i].ev;
        gram.diagonal().array() +=
            2.0 * cfg.c * static_cast<double>(g.degrees[i]) + cfg.lambda;
        solvers.emplace_back(std::move(gram));
        rhs0.push_back(data[i].ev.transpose() * data[i].ea);
        // An isolated node's system is E^T E + lambda I; probe it once so a
        // rank-deficient lambda = 0 node fails fast instead of iterating on NaNs.
        if (g.degrees[i] == 0 && cfg.lambda == 0.0) {
            const Matrix probe = solvers.back().solve(rhs0.back());
            const double res = (solvers.back().g * probe - rhs0.back()).norm();
            if (!probe.allFinite() || res > 1e-8 * (1.0 + rhs0.back().norm()))
                throw RankDeficiencyError("pdmm: indefinite system at isolated node " +
                                          std::to_string(data[i].node) +
                                          " with lambda = 0; set lambda > 0");
        }
    }

    AlignmentMap w(n_nodes, Matrix::Zero(m, n));
    AlignmentMap w_prev;
    std::vector<Matrix> zp(n_dir, Matrix::Zero(m, n)), zm(n_dir, Matrix::Zero(m, n));
    std::vector<Matrix> yp(n_dir, Matrix::Zero(m, n)), ym(n_dir, Matrix::Zero(m, n));

    PdmmResult res;
    const double ceps = cfg.c * cfg.epsilon;

    for (int t = 0; t < cfg.max_iters; ++t) {
        if (cfg.stop_tol || cfg.record_trace) w_prev = w;

        detail::parallel_for(n_nodes, cfg.threads, [&](std::size_t i) {
            Matrix rhs = rhs0[i];
            for (int k : mine[i]) rhs -= zp[static_cast<std::size_t>(k)] -
                                         zm[static_cast<std::size_t>(k)];
            w[i] = solvers[i].solve(rhs);
        });

        bool finite = true;
        for (const auto& wi : w)
            if (!wi.allFinite()) finite = false;
        if (!finite)
            throw SolverError("pdmm: non-finite state at iteration " + std::to_string(t));

        detail::parallel_for(n_dir, cfg.threads, [&](std::size_t k) {
            const auto& wi = w[static_cast<std::size_t>(own[k])];
            yp[k] = zp[k] + (2.0 * cfg.c) * wi;
            yp[k].array() -= ceps;
            ym[k] = zm[k] - (2.0 * cfg.c) * wi;
            ym[k].array() -= ceps;
        });

        detail::parallel_for(n_dir, cfg.threads, [&](std::size_t k) {
            const auto r = static_cast<std::size_t>(rev[k]);
            zp[k] = (yp[k].array() + ym[r].array() > 0.0)
                        .select(ym[r].array(), -yp[k].array())
                        .matrix();
            zm[k] = (ym[k].array() + yp[r].array() > 0.0)
                        .select(yp[r].array(), -ym[k].array())
                        .matrix();
        });

        res.iters_run = t + 1;

        double step = 0.0;
        if (cfg.stop_tol || cfg.record_trace) {
            for (std::size_t i = 0; i < n_nodes; ++i) {
                const double s = (w[i] - w_prev[i]).cwiseAbs().maxCoeff();
                if (s > step) step = s;
            }
        }
        if (cfg.record_trace)
            res.trace.push_back(
                {t, ridge_objective(data, w, cfg.lambda), max_violation(g, w), step});
        if (cfg.stop_tol && t > 0 && step < *cfg.stop_tol) break;
    }

    res.w = std::move(w);
    return res;
}

/// Trace rows as CSV: `iter, objective, max_violation, max_step`.
inline void write_pdmm_trace_csv(std::ostream& out, const std::vector<PdmmTraceRow>& trace) {
    std::ostringstream buf;
    buf.precision(17);
    buf << "iter,objective,max_violation,max_step\n";
    for (const auto& row : trace)
        buf << row.iter << ',' << row.objective << ',' << row.max_violation << ','
            << row.max_step << '\n';
    out << buf.str();
}

} // namespace lago
