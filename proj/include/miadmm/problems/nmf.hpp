#pragma once

// Nonnegative matrix factorization:
//
//   min_{V,W} ‖U − VW‖²_F   s.t.  V ≥ 0, W ≥ 0
//
// with blocks vec(V) and vec(W) stacked into z. Matrices are vectorized row-major.

#include <cstdint>
#include <memory>
#include <random>

#include "miadmm/problem.hpp"
#include "miadmm/problems/common.hpp"

namespace miadmm::problems {

struct NmfProblem {
    Matrix U;
    Eigen::Index rank = 1;
};

/// Initial value of every factor entry; all zeros is a stationary point.
inline constexpr double kNmfInitialValue = 1e-2;

inline double nmf_relative_error(const Matrix& u, const Matrix& v, const Matrix& w) {
    const double nu = u.norm();
    const double res = (u - v * w).norm();
    return nu > 0.0 ? res / nu : res;
}

inline ProblemSpec build_nmf_problem(const NmfProblem& p) {
    const Eigen::Index rows = p.U.rows();
    const Eigen::Index cols = p.U.cols();
    const Eigen::Index r = p.rank;
    if (rows < 1 || cols < 1) throw InvalidArgument("build_nmf_problem: empty data");
    if (r < 1) throw InvalidArgument("build_nmf_problem: rank must be positive");
    if (!all_finite(p.U) || (p.U.array() < 0.0).any())
        throw InvalidArgument("build_nmf_problem: U must be finite and nonnegative");

    auto data = std::make_shared<NmfProblem>(p);
    ProblemSpec spec;
    spec.z_dim = rows * r + r * cols;
    spec.smooth = SmoothTerm::zero();

    // V-block: rows of V are independent, each with Hessian 2WWᵀ + wI.
    spec.blocks.push_back({rows * r, StackSelector{0}, [data, rows, cols, r](const BlockContext& ctx) {
                               const auto w = as_matrix(ctx.blocks[1], r, cols);
                               Matrix h = 2.0 * w * w.transpose();
                               h.diagonal().array() += ctx.weight;
                               Matrix rhs = 2.0 * w * data->U.transpose();
                               rhs += ctx.weight * as_matrix(ctx.local_target(), rows, r).transpose();
                               const Matrix vt = solve_columns(h, rhs, 0.0, CoordConstraint::NonNegative,
                                                               as_matrix(ctx.current(), rows, r).transpose(),
                                                               ctx.sub_tol);
                               return flatten(vt.transpose());
                           }});
    // W-block: columns of W are independent, each with Hessian 2VᵀV + wI.
    spec.blocks.push_back({r * cols, StackSelector{rows * r}, [data, rows, cols, r](const BlockContext& ctx) {
                               const auto v = as_matrix(ctx.blocks[0], rows, r);
                               Matrix h = 2.0 * v.transpose() * v;
                               h.diagonal().array() += ctx.weight;
                               Matrix rhs = 2.0 * v.transpose() * data->U;
                               rhs += ctx.weight * as_matrix(ctx.local_target(), r, cols);
                               return flatten(solve_columns(h, rhs, 0.0, CoordConstraint::NonNegative,
                                                            Matrix(as_matrix(ctx.current(), r, cols)),
                                                            ctx.sub_tol));
                           }});
    spec.objective = [data, rows, cols, r](std::span<const Vector> x) {
        return (data->U - as_matrix(x[0], rows, r) * as_matrix(x[1], r, cols)).squaredNorm();
    };
    spec.inequality = [](std::span<const Vector> x) {
        Vector out(x[0].size() + x[1].size());
        out << -x[0], -x[1];
        return out;
    };
    spec.initial_point = {Vector::Constant(rows * r, kNmfInitialValue), Vector::Constant(r * cols, kNmfInitialValue)};
    return spec;
}

/// Relative error ‖U − VW‖_F/‖U‖_F of a solved state's blocks.
inline double nmf_relative_error(const NmfProblem& p, std::span<const Vector> blocks) {
    return nmf_relative_error(p.U, as_matrix(blocks[0], p.U.rows(), p.rank),
                              as_matrix(blocks[1], p.rank, p.U.cols()));
}

/// U = V*W* with V*, W* uniform in [0, 1].
inline NmfProblem gen_nmf(Eigen::Index rows, Eigen::Index cols, Eigen::Index rank, std::uint64_t seed) {
    if (rows < 1 || cols < 1 || rank < 1) throw InvalidArgument("gen_nmf: sizes must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix v(rows, rank);
    Matrix w(rank, cols);
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = unif(rng);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = unif(rng);
    return {v * w, rank};
}

}  // namespace miadmm::problems
